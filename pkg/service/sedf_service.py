import logging
from dataclasses import dataclass
from typing import Iterable

from utils.residues import AffineMap, ResidueSet, apply_affine, units
from utils.validity import ValidityReport, coverage_report


logger = logging.getLogger(__name__)


@dataclass(frozen = True)
class Sedf:
    """Represent a candidate (n, 2, k; 1) strong external difference family in Z_n.

    Args:
        n: Group order.
        set_a: First set.
        set_b: Second set.
    """

    n: int
    set_a: ResidueSet
    set_b: ResidueSet

    def __post_init__(self) -> None:
        if self.set_a.modulus != self.n or self.set_b.modulus != self.n:
            raise ValueError(
                f"Modulus mismatch: Sedf over Z_{self.n} holds sets over "
                f"Z_{self.set_a.modulus} and Z_{self.set_b.modulus}"
            )

    @classmethod
    def of(cls, n: int, set_a: Iterable[int], set_b: Iterable[int]) -> "Sedf":
        """Build an SEDF from raw integer collections.

        Args:
            n: Group order.
            set_a: Integers of the first set.
            set_b: Integers of the second set.
        """
        return cls(
            n = n,
            set_a = ResidueSet.of(set_a, n),
            set_b = ResidueSet.of(set_b, n),
        )

    @classmethod
    def from_members(cls, n: int, set_a: Iterable[int], set_b: Iterable[int]) -> "Sedf":
        """Build an SEDF from external input without reducing or merging members.

        Args:
            n: Group order.
            set_a: Distinct residues of the first set.
            set_b: Distinct residues of the second set.
        """
        return cls(
            n = n,
            set_a = ResidueSet.from_members(set_a, n),
            set_b = ResidueSet.from_members(set_b, n),
        )

    @property
    def k(self) -> int:
        return len(self.set_a)

    def swapped(self) -> "Sedf":
        """Return the family with its two sets exchanged."""
        return Sedf(n = self.n, set_a = self.set_b, set_b = self.set_a)

    def sort_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.set_a.elements, self.set_b.elements


@dataclass(frozen = True)
class EquivalenceWitness:
    """Represent an affine equivalence, optionally exchanging the two sets.

    Args:
        map: Affine map applied to both sets.
        swapped: Whether the images are exchanged afterwards.
    """

    map: AffineMap
    swapped: bool = False

    def apply(self, sedf: Sedf) -> Sedf:
        """Transform one SEDF by this witness.

        Args:
            sedf: Source family.
        """
        image = Sedf(
            n = sedf.n,
            set_a = apply_affine(self.map, sedf.set_a),
            set_b = apply_affine(self.map, sedf.set_b),
        )
        return image.swapped() if self.swapped else image

    def inverse(self) -> "EquivalenceWitness":
        return EquivalenceWitness(map = self.map.inverse(), swapped = self.swapped)


def external_difference_counts(n: int, minuend: Iterable[int], subtrahend: Iterable[int]) -> list[int]:
    """Count every y - x mod n for y in minuend and x in subtrahend.

    Args:
        n: Group order.
        minuend: Elements y.
        subtrahend: Elements x.
    """
    counts = [0] * n
    subtrahend_values = list(subtrahend)
    for y in minuend:
        for x in subtrahend_values:
            counts[(y - x) % n] += 1
    return counts


def verify_sedf(s: Sedf) -> ValidityReport:
    """Check the disjointness, size and single-coverage conditions.

    Args:
        s: Candidate family.
    """
    k = len(s.set_a)
    if len(s.set_b) != k:
        return ValidityReport.failed(reason = f"set sizes differ: {k} != {len(s.set_b)}")
    if s.n != k * k + 1:
        return ValidityReport.failed(reason = f"modulus {s.n} != k^2+1 for k={k}")
    shared = sorted(set(s.set_a.elements) & set(s.set_b.elements))
    if shared:
        return ValidityReport.failed(reason = f"sets are not disjoint (share {shared[0]})")

    counts = external_difference_counts(s.n, s.set_b.elements, s.set_a.elements)
    report = coverage_report(counts = counts)

    if logger.isEnabledFor(logging.DEBUG):
        reverse = coverage_report(
            counts = external_difference_counts(s.n, s.set_a.elements, s.set_b.elements)
        )
        if reverse.valid != report.valid:
            logger.debug("Directed difference checks disagree for %s", s)
    return report


def symmetrize(s: Sedf) -> tuple[Sedf, int]:
    """Translate both sets so that each is closed under negation.

    Args:
        s: Valid family.
    """
    for shift in range(s.n):
        set_a = s.set_a.translate(shift)
        if not set_a.is_symmetric():
            continue
        set_b = s.set_b.translate(shift)
        if set_b.is_symmetric():
            return Sedf(n = s.n, set_a = set_a, set_b = set_b), shift
    raise ValueError(f"No symmetric translate exists for {s}; input is not a valid SEDF")


def _minimal_image(
    n: int,
    lead: tuple[int, ...],
    trail: tuple[int, ...],
    multipliers: list[int],
) -> tuple[tuple[int, ...], tuple[int, ...], AffineMap]:
    """Minimize f(lead), then f(trail), over the affine group.

    A lex-minimal image always contains 0, so beta only ranges over -alpha*x for x in lead.

    Args:
        n: Group order.
        lead: Set whose image is minimized first.
        trail: Set whose image breaks ties.
        multipliers: Units of Z_n in ascending order.
    """
    best_lead: tuple[int, ...] | None = None
    best_trail: tuple[int, ...] | None = None
    best_map: AffineMap | None = None
    for alpha in multipliers:
        scaled = [(alpha * value) % n for value in lead]
        for anchor in sorted(scaled):
            beta = -anchor % n
            image = tuple(sorted((value + beta) % n for value in scaled))
            if best_lead is not None and image > best_lead:
                continue
            trail_image = tuple(sorted((alpha * value + beta) % n for value in trail))
            if best_lead is None or (image, trail_image) < (best_lead, best_trail):
                best_lead = image
                best_trail = trail_image
                best_map = AffineMap(alpha = alpha, beta = beta, modulus = n)
    return best_lead, best_trail, best_map


def canonical_form(s: Sedf) -> tuple[Sedf, EquivalenceWitness]:
    """Return the lexicographically least representative of the affine class.

    Args:
        s: Valid family.
    """
    if s.n == 1:
        return s, EquivalenceWitness(map = AffineMap.identity(1))
    if not s.set_a.elements or not s.set_b.elements:
        raise ValueError(f"Canonical form needs two non-empty sets, got {s}")

    multipliers = units(s.n)
    a_lead, a_trail, a_map = _minimal_image(s.n, s.set_a.elements, s.set_b.elements, multipliers)
    b_lead, b_trail, b_map = _minimal_image(s.n, s.set_b.elements, s.set_a.elements, multipliers)

    if (b_lead, b_trail) < (a_lead, a_trail):
        canonical = Sedf.of(s.n, b_lead, b_trail)
        witness = EquivalenceWitness(map = b_map, swapped = True)
    else:
        canonical = Sedf.of(s.n, a_lead, a_trail)
        witness = EquivalenceWitness(map = a_map, swapped = False)
    return canonical, witness


def equivalent(s1: Sedf, s2: Sedf) -> EquivalenceWitness | None:
    """Find an affine equivalence carrying s1 onto s2, if one exists.

    Args:
        s1: First family.
        s2: Second family over the same group.
    """
    if s1.n != s2.n:
        raise ValueError(f"Modulus mismatch: {s1.n} != {s2.n}")
    canonical_1, witness_1 = canonical_form(s1)
    canonical_2, witness_2 = canonical_form(s2)
    if canonical_1 != canonical_2:
        return None
    return EquivalenceWitness(
        map = witness_2.map.inverse().compose(witness_1.map),
        swapped = witness_1.swapped != witness_2.swapped,
    )


def to_near_factorization(s: Sedf) -> tuple[ResidueSet, ResidueSet]:
    """Return (A, -B) after checking that A + (-B) covers Z_n minus 0 once.

    Args:
        s: Valid family.
    """
    negated = s.set_b.negate()
    counts = [0] * s.n
    for x in s.set_a:
        for y in negated:
            counts[(x + y) % s.n] += 1
    if counts[0] != 0:
        raise ValueError(f"Sumset of {s} contains 0; sets are not disjoint")
    report = coverage_report(counts = counts, label = "sum")
    if not report.valid:
        raise ValueError(f"Not a near-factorization: {report.reason}")
    return s.set_a, negated
