from dataclasses import dataclass


@dataclass(frozen = True)
class ValidityReport:
    """Represent the outcome of a verifier.

    Args:
        valid: Whether every checked condition holds.
        reason: Human readable description of the first violated condition.
        repeated: Smallest difference (or product label) covered more than once.
        missing: Smallest difference (or product label) never covered.
    """

    valid: bool
    reason: str | None = None
    repeated: int | None = None
    missing: int | None = None

    @classmethod
    def ok(cls) -> "ValidityReport":
        """Build a passing report."""
        return cls(valid = True)

    @classmethod
    def failed(
        cls,
        reason: str,
        repeated: int | None = None,
        missing: int | None = None,
    ) -> "ValidityReport":
        """Build a failing report.

        Args:
            reason: Description of the violated condition.
            repeated: Optional repeated value.
            missing: Optional missing value.
        """
        return cls(valid = False, reason = reason, repeated = repeated, missing = missing)


def coverage_report(counts: list[int], label: str = "difference") -> ValidityReport:
    """Turn a coverage count table over 1..len(counts)-1 into a report.

    Index 0 of `counts` is ignored; every other index must be hit exactly once.

    Args:
        counts: Coverage counts indexed by value.
        label: Noun used in the failure reason.
    """
    repeated = next((value for value in range(1, len(counts)) if counts[value] > 1), None)
    missing = next((value for value in range(1, len(counts)) if counts[value] == 0), None)
    if repeated is None and missing is None:
        return ValidityReport.ok()

    parts: list[str] = []
    if repeated is not None:
        parts.append(f"{label} {repeated} repeats")
    if missing is not None:
        parts.append(f"{label} {missing} missing")
    return ValidityReport.failed(
        reason = "; ".join(parts),
        repeated = repeated,
        missing = missing,
    )
