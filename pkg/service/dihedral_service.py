import logging
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from utils.validity import ValidityReport


logger = logging.getLogger(__name__)

ELEMENT_PATTERN = re.compile(r"^(?P<flip>a?)(?P<rot>b(\^(?P<power>-?\d+))?)?$")


@dataclass(frozen = True, order = True)
class DihedralElement:
    """Represent a^flip b^rot in D_n with a^2 = b^n = e and aba = b^-1.

    Ordering is the normal order: rotations first, then reflections, each by rot.

    Args:
        flip: 0 for a rotation, 1 for a reflection.
        rot: Exponent of b in [0, n).
    """

    flip: int
    rot: int

    def __post_init__(self) -> None:
        if self.flip not in (0, 1):
            raise ValueError(f"flip must be 0 or 1, got {self.flip}")
        if self.rot < 0:
            raise ValueError(f"rot must be reduced, got {self.rot}")


@dataclass(frozen = True)
class DihedralSubsetPair:
    """Pair of subsets (S, T) of D_n kept in normal order.

    Args:
        n: Order of the rotation subgroup.
        s: First subset.
        t: Second subset.
    """

    n: int
    s: tuple[DihedralElement, ...]
    t: tuple[DihedralElement, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        for element in self.s + self.t:
            if element.rot >= self.n:
                raise ValueError(f"Element {format_element(element)} is not reduced modulo {self.n}")

    @classmethod
    def of(
        cls,
        n: int,
        s: Iterable[DihedralElement],
        t: Iterable[DihedralElement],
    ) -> "DihedralSubsetPair":
        """Build a pair, reducing exponents and sorting each side.

        Args:
            n: Order of the rotation subgroup.
            s: Elements of the first subset.
            t: Elements of the second subset.
        """
        return cls(n = n, s = normalize(s, n), t = normalize(t, n))

    @classmethod
    def from_members(
        cls,
        n: int,
        s: Iterable[DihedralElement],
        t: Iterable[DihedralElement],
    ) -> "DihedralSubsetPair":
        """Build a pair from external input, rejecting unreduced or repeated elements.

        Args:
            n: Order of the rotation subgroup.
            s: Elements of the first subset, each with rot < n.
            t: Elements of the second subset, each with rot < n.
        """
        sides = []
        for label, elements in (("S", list(s)), ("T", list(t))):
            repeated = sorted(g for g, count in Counter(elements).items() if count > 1)
            if repeated:
                raise ValueError(f"{label} repeats {format_elements(repeated)}")
            sides.append(tuple(sorted(elements)))
        return cls(n = n, s = sides[0], t = sides[1])


@dataclass(frozen = True)
class DihedralEquivalence:
    """Transformation (S, T) -> (gSh, h^-1 T g^-1), applied after (S, T) -> (T^-1, S^-1) when inverted.

    Args:
        g: Left multiplier.
        h: Right multiplier.
        inverted: Whether the inversion swap comes first.
    """

    g: DihedralElement
    h: DihedralElement
    inverted: bool = False


@dataclass(frozen = True)
class EquivalenceTranscript:
    """Verified set equalities showing the two constructions are equivalent.

    Args:
        k: Odd parameter.
        n: Order of the rotation subgroup, (k^2 + 1) / 2.
        h: Witness element a b^((k-1)/2).
        left: The set A1 h, equal to the tile construction's A.
        right: The set h A2^-1, equal to the tile construction's B.
    """

    k: int
    n: int
    h: DihedralElement
    left: tuple[DihedralElement, ...]
    right: tuple[DihedralElement, ...]


IDENTITY = DihedralElement(flip = 0, rot = 0)


def rotation(i: int, n: int) -> DihedralElement:
    return DihedralElement(flip = 0, rot = i % n)


def reflection(i: int, n: int) -> DihedralElement:
    return DihedralElement(flip = 1, rot = i % n)


def normalize(elements: Iterable[DihedralElement], n: int) -> tuple[DihedralElement, ...]:
    return tuple(sorted({DihedralElement(flip = g.flip, rot = g.rot % n) for g in elements}))


def dihedral_elements(n: int) -> list[DihedralElement]:
    """List D_n in normal order.

    Args:
        n: Order of the rotation subgroup.
    """
    return [DihedralElement(flip = flip, rot = i) for flip in (0, 1) for i in range(n)]


def dihedral_mul(g: DihedralElement, h: DihedralElement, n: int) -> DihedralElement:
    """Multiply two elements using b^i a = a b^-i.

    Args:
        g: Left factor.
        h: Right factor.
        n: Order of the rotation subgroup.
    """
    sign = -1 if h.flip else 1
    return DihedralElement(flip = g.flip ^ h.flip, rot = (h.rot + sign * g.rot) % n)


def dihedral_inv(g: DihedralElement, n: int) -> DihedralElement:
    if g.flip:
        return g
    return DihedralElement(flip = 0, rot = -g.rot % n)


def multiply_sets(
    left: Iterable[DihedralElement],
    right: Iterable[DihedralElement],
    n: int,
) -> tuple[DihedralElement, ...]:
    right_values = list(right)
    return normalize((dihedral_mul(g, h, n) for g in left for h in right_values), n)


def invert_set(elements: Iterable[DihedralElement], n: int) -> tuple[DihedralElement, ...]:
    return normalize((dihedral_inv(g, n) for g in elements), n)


def format_element(g: DihedralElement) -> str:
    """Render an element as "e", "b", "b^i", "a", "ab" or "ab^i".

    Args:
        g: Element to render.
    """
    prefix = "a" if g.flip else ""
    if g.rot == 0:
        return prefix or "e"
    if g.rot == 1:
        return f"{prefix}b"
    return f"{prefix}b^{g.rot}"


def format_elements(elements: Iterable[DihedralElement]) -> str:
    return "{" + ",".join(format_element(g) for g in elements) + "}"


def parse_element(text: str, n: int) -> DihedralElement:
    """Parse "e", "a", "b", "b^i", "ab" or "ab^i", reducing i modulo n.

    Args:
        text: Element text.
        n: Order of the rotation subgroup.
    """
    cleaned = text.strip().replace(" ", "")
    if cleaned == "e":
        return IDENTITY
    match = ELEMENT_PATTERN.match(cleaned)
    if not cleaned or match is None:
        raise ValueError(f"Cannot parse dihedral element `{text}`")
    flip = 1 if match.group("flip") else 0
    if match.group("rot") is None:
        rot = 0
    else:
        rot = int(match.group("power")) if match.group("power") is not None else 1
    return DihedralElement(flip = flip, rot = rot % n)


def parse_elements(text: str, n: int) -> tuple[DihedralElement, ...]:
    """Parse a bracketed comma list such as "{e,ab^5,b^5}".

    Args:
        text: Set text, braces optional.
        n: Order of the rotation subgroup.
    """
    body = text.strip().strip("{}[]")
    if not body.strip():
        return ()
    return normalize((parse_element(item, n) for item in body.split(",")), n)


def verify_near_factorization(p: DihedralSubsetPair) -> ValidityReport:
    """Check that the products st are distinct and cover D_n minus e.

    Args:
        p: Candidate pair.
    """
    products = Counter(dihedral_mul(s, t, p.n) for s in p.s for t in p.t)
    if products[IDENTITY]:
        return ValidityReport.failed(reason = "product set contains e")
    repeated = next((g for g in dihedral_elements(p.n) if products[g] > 1), None)
    missing = next(
        (g for g in dihedral_elements(p.n) if g != IDENTITY and not products[g]),
        None,
    )
    if repeated is None and missing is None:
        return ValidityReport.ok()

    parts: list[str] = []
    if repeated is not None:
        parts.append(f"product {format_element(repeated)} repeats")
    if missing is not None:
        parts.append(f"product {format_element(missing)} missing")
    return ValidityReport.failed(reason = "; ".join(parts))


def verify_dihedral_sedf(n: int, a1: Iterable[DihedralElement], a2: Iterable[DihedralElement]) -> ValidityReport:
    """Check that (A1, A2) is an SEDF in D_n through its near-factorization (A1, A2^-1).

    Args:
        n: Order of the rotation subgroup.
        a1: First set.
        a2: Second set.
    """
    first = normalize(a1, n)
    second = normalize(a2, n)
    if len(first) != len(second):
        return ValidityReport.failed(reason = f"set sizes differ: {len(first)} != {len(second)}")
    shared = set(first) & set(second)
    if shared:
        return ValidityReport.failed(reason = f"sets are not disjoint (share {format_element(min(shared))})")
    return verify_near_factorization(
        DihedralSubsetPair(n = n, s = first, t = invert_set(second, n))
    )


def cghk_construction(n: int, k: int) -> DihedralSubsetPair:
    """Build the tile near-factorization of D_n with |A| = k.

    Args:
        n: Order of the rotation subgroup.
        k: Divisor of 2n - 1.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if k < 1 or (2 * n - 1) % k:
        raise ValueError(f"k={k} does not divide 2n-1={2 * n - 1}")
    half = (k - 1) // 2
    s = [rotation(i, n) for i in range(1, half + 1)]
    s += [reflection(i, n) for i in range(half + 1)]
    t = [rotation(i, n) for i in range(0, n, k)]
    t += [reflection(i, n) for i in range(k, n, k)]
    pair = DihedralSubsetPair.of(n = n, s = s, t = t)
    logger.debug("Tile construction n=%d k=%d: |A|=%d |B|=%d", n, k, len(pair.s), len(pair.t))
    return pair


def _check_odd_parameter(k: int) -> int:
    if k < 3 or k % 2 == 0:
        raise ValueError(f"k must be an odd integer >= 3, got {k}")
    return (k * k + 1) // 2


def hjn_construction(k: int) -> DihedralSubsetPair:
    """Build the SEDF (A1, A2) in D_{(k^2+1)/2}.

    The near-factorization is (A1, A2^-1); see `sedf_near_factorization`.

    Args:
        k: Odd integer >= 3.
    """
    n = _check_odd_parameter(k)
    half = (k - 1) // 2
    a1 = [rotation(i, n) for i in range(half + 1)]
    a1 += [reflection(i, n) for i in range((k - 3) // 2 + 1)]
    a2 = [rotation(i * k, n) for i in range(1, half + 1)]
    a2 += [reflection(i * k + half, n) for i in range(half + 1)]
    return DihedralSubsetPair.of(n = n, s = a1, t = a2)


def sedf_near_factorization(p: DihedralSubsetPair) -> DihedralSubsetPair:
    return DihedralSubsetPair(n = p.n, s = p.s, t = invert_set(p.t, p.n))


def equivalence_witness(k: int) -> EquivalenceTranscript:
    """Show that both constructions give equivalent near-factorizations.

    Args:
        k: Odd integer >= 3.
    """
    n = _check_odd_parameter(k)
    h = reflection((k - 1) // 2, n)
    tile = cghk_construction(n = n, k = k)
    sedf = hjn_construction(k)
    left = multiply_sets(sedf.s, [h], n)
    right = multiply_sets([h], invert_set(sedf.t, n), n)
    if left != tile.s:
        raise RuntimeError(f"A1 h = {format_elements(left)} differs from A = {format_elements(tile.s)}")
    if right != tile.t:
        raise RuntimeError(f"h A2^-1 = {format_elements(right)} differs from B = {format_elements(tile.t)}")
    return EquivalenceTranscript(k = k, n = n, h = h, left = left, right = right)


def transform_pair(p: DihedralSubsetPair, witness: DihedralEquivalence) -> DihedralSubsetPair:
    """Apply an equivalence to a pair.

    Args:
        p: Source pair.
        witness: Transformation to apply.
    """
    s, t = (invert_set(p.t, p.n), invert_set(p.s, p.n)) if witness.inverted else (p.s, p.t)
    g_inverse = dihedral_inv(witness.g, p.n)
    h_inverse = dihedral_inv(witness.h, p.n)
    return DihedralSubsetPair(
        n = p.n,
        s = multiply_sets(multiply_sets([witness.g], s, p.n), [witness.h], p.n),
        t = multiply_sets(multiply_sets([h_inverse], t, p.n), [g_inverse], p.n),
    )


def near_factorizations_equivalent(
    p1: DihedralSubsetPair,
    p2: DihedralSubsetPair,
) -> DihedralEquivalence | None:
    """Search for a transformation carrying p1 onto p2.

    Scans inverted = False before True, then g and h in normal order.

    Args:
        p1: Source near-factorization.
        p2: Target near-factorization.
    """
    if p1.n != p2.n:
        return None
    if len(p1.s) * len(p1.t) != len(p2.s) * len(p2.t):
        return None
    if not verify_near_factorization(p1).valid or not verify_near_factorization(p2).valid:
        return None

    n = p1.n
    elements = dihedral_elements(n)
    for inverted in (False, True):
        s, t = (invert_set(p1.t, n), invert_set(p1.s, n)) if inverted else (p1.s, p1.t)
        if len(s) != len(p2.s):
            continue
        for g in elements:
            left = multiply_sets([g], s, n)
            for h in elements:
                if multiply_sets(left, [h], n) != p2.s:
                    continue
                witness = DihedralEquivalence(g = g, h = h, inverted = inverted)
                if transform_pair(p1, witness).t == p2.t:
                    return witness
    return None


def render_grid(n: int, elements: Iterable[DihedralElement], mark: str = "X") -> str:
    """Draw the two-row tile diagram: rotations b^i on top, reflections ab^i below.

    Args:
        n: Order of the rotation subgroup.
        elements: Marked cells.
        mark: Character for a marked cell.
    """
    chosen = set(normalize(elements, n))
    width = len(str(n - 1))
    header = "   " + " ".join(str(i).rjust(width) for i in range(n))
    rows = [header]
    for flip, label in ((0, "b "), (1, "ab")):
        cells = [
            (mark if DihedralElement(flip = flip, rot = i) in chosen else ".").rjust(width)
            for i in range(n)
        ]
        rows.append(f"{label} " + " ".join(cells))
    return "\n".join(rows)
