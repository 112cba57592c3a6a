import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from service.sedf_service import Sedf
from utils.validity import ValidityReport, coverage_report


logger = logging.getLogger(__name__)

SHORTHAND_PATTERN = re.compile(r"^\(\s*\d+(\s*,\s*\d+)*\s*\)$")


class StructureError(ValueError):
    """Raised when a labelling has neither type I nor type II structure."""


class BlowupKind(str, Enum):
    I = "I"
    II = "II"

    def other(self) -> "BlowupKind":
        return BlowupKind.II if self is BlowupKind.I else BlowupKind.I


class StructureKind(str, Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    TRIVIAL = "Trivial"


@dataclass(frozen = True)
class Valuation:
    """Represent a labelled bipartition of K_{a,b} inside {0, ..., ab}.

    Args:
        a: Size of the small side.
        b: Size of the large side.
        small: Labels of the small side, strictly increasing.
        large: Labels of the large side, strictly increasing.
    """

    a: int
    b: int
    small: tuple[int, ...]
    large: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.a < 1 or self.b < 1:
            raise ValueError(f"Side sizes must be positive, got a={self.a}, b={self.b}")
        object.__setattr__(self, "small", tuple(sorted(self.small)))
        object.__setattr__(self, "large", tuple(sorted(self.large)))
        if len(set(self.small)) != len(self.small) or len(set(self.large)) != len(self.large):
            raise ValueError("Valuation sides must not repeat labels")
        if len(self.small) != self.a or len(self.large) != self.b:
            raise ValueError(
                f"Side sizes {len(self.small)}/{len(self.large)} do not match a={self.a}, b={self.b}"
            )

    @classmethod
    def of(cls, small: Iterable[int], large: Iterable[int]) -> "Valuation":
        """Build a valuation, reading a and b off the label sets.

        Args:
            small: Small-side labels.
            large: Large-side labels.
        """
        small_labels = tuple(small)
        large_labels = tuple(large)
        return cls(
            a = len(small_labels),
            b = len(large_labels),
            small = small_labels,
            large = large_labels,
        )

    @property
    def edges(self) -> int:
        return self.a * self.b

    @property
    def threshold(self) -> int:
        return self.small[-1]


@dataclass(frozen = True)
class BlowupStep:
    """One Blowup operation of the given kind with run length ell.

    Args:
        kind: Blowup I expands the small side, Blowup II the large side.
        ell: Run length, at least 2.
    """

    kind: BlowupKind
    ell: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", BlowupKind(self.kind))
        if self.ell < 2:
            raise ValueError(f"Blowup requires ell >= 2, got {self.ell}")


@dataclass(frozen = True)
class StructureReport:
    """Detected normal form of a valuation.

    Args:
        kind: TypeI, TypeII or Trivial.
        ell: Run length, absent for the trivial valuation.
    """

    kind: StructureKind
    ell: int | None = None


TRIVIAL_VALUATION = Valuation(a = 1, b = 1, small = (0,), large = (1,))


def verify_valuation(v: Valuation) -> ValidityReport:
    """Check every alpha-valuation condition and report the first violation.

    Args:
        v: Candidate labelling.
    """
    n = v.edges
    labels = v.small + v.large
    out_of_range = next((label for label in labels if not 0 <= label <= n), None)
    if out_of_range is not None:
        return ValidityReport.failed(reason = f"label {out_of_range} is outside [0, {n}]")
    shared = sorted(set(v.small) & set(v.large))
    if shared:
        return ValidityReport.failed(reason = f"label {shared[0]} is on both sides")
    if v.small[-1] >= v.large[0]:
        return ValidityReport.failed(
            reason = f"threshold violated: max(small)={v.small[-1]} >= min(large)={v.large[0]}"
        )

    counts = bytearray(n + 1)
    for u in v.large:
        for w in v.small:
            difference = u - w
            if counts[difference] < 2:
                counts[difference] += 1
    report = coverage_report(counts = list(counts))
    if not report.valid:
        clash = internal_difference_clash(v)
        if clash is not None:
            logger.debug("Internal difference %d repeats: small %s, large %s", *clash)
    return report


def internal_difference_clash(
    v: Valuation,
) -> tuple[int, tuple[int, int], tuple[int, int]] | None:
    """Find a positive difference occurring inside both sides, if any.

    Args:
        v: Labelling to inspect.
    """
    small_differences: dict[int, tuple[int, int]] = {}
    for index, x in enumerate(v.small):
        for y in v.small[:index]:
            small_differences.setdefault(x - y, (x, y))
    for index, u in enumerate(v.large):
        for w in v.large[:index]:
            if u - w in small_differences:
                return u - w, small_differences[u - w], (u, w)
    return None


def phi(v: Valuation) -> Valuation:
    """Apply x -> ab - x to every label; the sides exchange roles.

    Args:
        v: Valuation of K_{a,b}.
    """
    n = v.edges
    return Valuation(
        a = v.b,
        b = v.a,
        small = tuple(n - label for label in v.large),
        large = tuple(n - label for label in v.small),
    )


def valuations_equivalent(v1: Valuation, v2: Valuation) -> bool:
    """Check equality up to the label reflection phi.

    Args:
        v1: First valuation.
        v2: Second valuation.
    """
    if sorted((v1.a, v1.b)) != sorted((v2.a, v2.b)):
        raise ValueError(
            f"Dimension mismatch: K_{{{v1.a},{v1.b}}} vs K_{{{v2.a},{v2.b}}}"
        )
    return v1 == v2 or v2 == phi(v1)


def blowup(v: Valuation, step: BlowupStep) -> Valuation:
    """Scale every label by ell and expand one side into runs.

    Args:
        v: Valid valuation.
        step: Kind and run length.
    """
    ell = step.ell
    if step.kind is BlowupKind.I:
        return Valuation(
            a = ell * v.a,
            b = v.b,
            small = tuple(ell * x + offset for x in v.small for offset in range(ell)),
            large = tuple(ell * y for y in v.large),
        )
    return Valuation(
        a = v.a,
        b = ell * v.b,
        small = tuple(ell * x for x in v.small),
        large = tuple(ell * y - offset for y in v.large for offset in range(ell)),
    )


def _run_length(labels: set[int], start: int, direction: int) -> int:
    length = 0
    while start + direction * length in labels:
        length += 1
    return length


def _is_type_one(v: Valuation, ell: int) -> bool:
    if ell < 2 or v.a % ell != 0:
        return False
    if any(y % ell for y in v.large):
        return False
    starts = sorted({x - x % ell for x in v.small})
    return v.small == tuple(start + offset for start in starts for offset in range(ell))


def _is_type_two(v: Valuation, ell: int) -> bool:
    if ell < 2 or v.b % ell != 0:
        return False
    if any(x % ell for x in v.small):
        return False
    ends = sorted({y + (-y) % ell for y in v.large})
    return v.large == tuple(end - ell + 1 + offset for end in ends for offset in range(ell))


def detect_structure(v: Valuation) -> StructureReport:
    """Classify a valid valuation as type I, type II or trivial.

    The run length is the maximal run at the threshold: the run in small
    ending at max(small) for type I, the run in large starting at min(large)
    for type II.

    Args:
        v: Valid valuation.
    """
    if v.a == 1 and v.b == 1:
        return StructureReport(kind = StructureKind.TRIVIAL)

    small_run = _run_length(set(v.small), v.small[-1], -1)
    if _is_type_one(v, small_run):
        return StructureReport(kind = StructureKind.TYPE_I, ell = small_run)

    large_run = _run_length(set(v.large), v.large[0], 1)
    if _is_type_two(v, large_run):
        return StructureReport(kind = StructureKind.TYPE_II, ell = large_run)

    raise StructureError(
        f"Labelling {v.small}/{v.large} is neither type I nor type II; "
        "it is not an alpha-valuation"
    )


def project(v: Valuation, kind: BlowupKind) -> tuple[Valuation, int]:
    """Collapse the runs of a type I (or type II) valuation.

    Args:
        v: Valid valuation with the matching structure.
        kind: Projection I or Projection II.
    """
    kind = BlowupKind(kind)
    report = detect_structure(v)
    expected = StructureKind.TYPE_I if kind is BlowupKind.I else StructureKind.TYPE_II
    if report.kind is not expected:
        raise StructureError(
            f"Projection {kind.value} needs a {expected.value} valuation, got {report.kind.value}"
        )

    ell = report.ell
    if kind is BlowupKind.I:
        projected = Valuation(
            a = v.a // ell,
            b = v.b,
            small = tuple(x // ell for x in v.small if x % ell == 0),
            large = tuple(y // ell for y in v.large),
        )
    else:
        projected = Valuation(
            a = v.a,
            b = v.b // ell,
            small = tuple(x // ell for x in v.small),
            large = tuple(y // ell for y in v.large if y % ell == 0),
        )
    return projected, ell


def decompose(v: Valuation) -> list[BlowupStep]:
    """Project down to K_{1,1} and return the steps in blowup order.

    Args:
        v: Valid valuation.
    """
    steps: list[BlowupStep] = []
    current = v
    while True:
        report = detect_structure(current)
        if report.kind is StructureKind.TRIVIAL:
            break
        kind = BlowupKind.I if report.kind is StructureKind.TYPE_I else BlowupKind.II
        current, ell = project(current, kind)
        steps.append(BlowupStep(kind = kind, ell = ell))
    if current != TRIVIAL_VALUATION:
        raise StructureError(f"Projection ended at {current}, not the K_{{1,1}} valuation")
    steps.reverse()
    return steps


def compose(steps: Iterable[BlowupStep]) -> Valuation:
    """Fold blowup over the steps starting from ({0}, {1}).

    Args:
        steps: Blowup steps in application order.
    """
    current = TRIVIAL_VALUATION
    for step in steps:
        current = blowup(current, step)
    return current


def blowup_trace(steps: Iterable[BlowupStep]) -> list[tuple[BlowupStep, Valuation, Valuation]]:
    """Record each blowup as (step, labels after scaling, labels after expansion).

    Args:
        steps: Blowup steps in application order.
    """
    trace: list[tuple[BlowupStep, Valuation, Valuation]] = []
    current = TRIVIAL_VALUATION
    for step in steps:
        scaled = Valuation(
            a = current.a,
            b = current.b,
            small = tuple(step.ell * x for x in current.small),
            large = tuple(step.ell * y for y in current.large),
        )
        current = blowup(current, step)
        trace.append((step, scaled, current))
    return trace


def rosa_valuation(a: int) -> Valuation:
    """Build ({0, ..., a-1}, {a, 2a, ..., a^2}).

    Args:
        a: Side size, at least 1.
    """
    if a < 1:
        raise ValueError(f"a must be positive, got {a}")
    return Valuation(
        a = a,
        b = a,
        small = tuple(range(a)),
        large = tuple(a * index for index in range(1, a + 1)),
    )


def to_sedf(v: Valuation) -> Sedf:
    """View a valuation of K_{a,a} as an (a^2+1, 2, a; 1)-SEDF in Z_{a^2+1}.

    Args:
        v: Valid square valuation.
    """
    if v.a != v.b:
        raise ValueError(f"Only square valuations give SEDFs, got K_{{{v.a},{v.b}}}")
    return Sedf.of(v.edges + 1, v.small, v.large)


def parse_sequence(text: str) -> list[BlowupStep]:
    """Parse "II:4,I:4" or the alternating shorthand "(4,4)" that starts with II.

    Args:
        text: Sequence text.
    """
    stripped = text.strip()
    if not stripped or stripped == "()":
        return []

    if SHORTHAND_PATTERN.match(stripped):
        values = [int(part) for part in stripped[1:-1].split(",")]
        kind = BlowupKind.II
        steps: list[BlowupStep] = []
        for ell in values:
            steps.append(BlowupStep(kind = kind, ell = ell))
            kind = kind.other()
        return steps

    steps = []
    for token in stripped.split(","):
        kind_text, separator, ell_text = token.strip().partition(":")
        if not separator:
            raise ValueError(f"Blowup step `{token.strip()}` must look like KIND:ell")
        try:
            kind = BlowupKind(kind_text.strip().upper())
            ell = int(ell_text)
        except ValueError as exc:
            raise ValueError(f"Invalid blowup step `{token.strip()}`") from exc
        steps.append(BlowupStep(kind = kind, ell = ell))
    return steps


def format_sequence(steps: list[BlowupStep]) -> str:
    """Render steps in the table shorthand when it applies, else as KIND:ell.

    Args:
        steps: Blowup steps in application order.
    """
    alternating = all(
        current.kind is not following.kind
        for current, following in zip(steps, steps[1:])
    )
    if steps and alternating and steps[0].kind is BlowupKind.II:
        return "(" + ",".join(str(step.ell) for step in steps) + ")"
    if not steps:
        return "()"
    return ",".join(f"{step.kind.value}:{step.ell}" for step in steps)
