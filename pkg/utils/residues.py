import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator


class Ordering(Enum):
    """Represent the outcome of a lexicographic comparison."""

    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen = True)
class Residue:
    """Represent one element of the cyclic group Z_n.

    Args:
        value: Representative in the range [0, modulus).
        modulus: Positive group order.
    """

    value: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"Modulus must be positive, got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"Residue {self.value} is outside [0, {self.modulus})")

    @classmethod
    def of(cls, value: int, modulus: int) -> "Residue":
        """Build a residue by reducing an arbitrary integer.

        Args:
            value: Any integer.
            modulus: Positive group order.
        """
        if modulus < 1:
            raise ValueError(f"Modulus must be positive, got {modulus}")
        return cls(value = value % modulus, modulus = modulus)


@dataclass(frozen = True)
class ResidueSet:
    """Represent a subset of Z_n in sorted, deduplicated normal form.

    Args:
        modulus: Positive group order.
        elements: Strictly increasing tuple of residues in [0, modulus).
    """

    modulus: int
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"Modulus must be positive, got {self.modulus}")
        for value in self.elements:
            if not 0 <= value < self.modulus:
                raise ValueError(f"Residue {value} is outside [0, {self.modulus})")
        if any(left >= right for left, right in zip(self.elements, self.elements[1:])):
            raise ValueError("ResidueSet elements must be strictly increasing")

    @classmethod
    def of(cls, values: Iterable[int], modulus: int) -> "ResidueSet":
        """Build a set by reducing, sorting and deduplicating raw integers.

        Args:
            values: Any iterable of integers.
            modulus: Positive group order.
        """
        if modulus < 1:
            raise ValueError(f"Modulus must be positive, got {modulus}")
        return cls(
            modulus = modulus,
            elements = tuple(sorted({value % modulus for value in values})),
        )

    @classmethod
    def from_members(cls, values: Iterable[int], modulus: int) -> "ResidueSet":
        """Build a set from distinct residues already in [0, modulus).

        Unlike `of`, nothing is reduced or merged; raw input that is out of
        range or repeats a member raises ValueError.

        Args:
            values: Member residues in any order.
            modulus: Positive group order.
        """
        members = sorted(values)
        repeated = sorted(value for value, count in Counter(members).items() if count > 1)
        if repeated:
            raise ValueError(f"Residues {repeated} appear more than once")
        return cls(modulus = modulus, elements = tuple(members))

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, value: object) -> bool:
        return value in self.elements

    def translate(self, shift: int) -> "ResidueSet":
        """Return the translate S + shift.

        Args:
            shift: Integer added to every element.
        """
        return ResidueSet.of((value + shift for value in self.elements), self.modulus)

    def negate(self) -> "ResidueSet":
        """Return -S."""
        return ResidueSet.of((-value for value in self.elements), self.modulus)

    def is_symmetric(self) -> bool:
        """Check whether the set is closed under negation."""
        return self.negate() == self

    def as_list(self) -> list[int]:
        """Return the elements as a plain list."""
        return list(self.elements)


@dataclass(frozen = True)
class AffineMap:
    """Represent the map x -> alpha * x + beta on Z_modulus.

    Args:
        alpha: Multiplier, must be a unit modulo modulus.
        beta: Additive shift.
        modulus: Positive group order.
    """

    alpha: int
    beta: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"Modulus must be positive, got {self.modulus}")
        object.__setattr__(self, "alpha", self.alpha % self.modulus)
        object.__setattr__(self, "beta", self.beta % self.modulus)
        if math.gcd(self.alpha, self.modulus) != 1:
            raise ValueError(
                f"Multiplier {self.alpha} is not a unit modulo {self.modulus}"
            )

    @classmethod
    def identity(cls, modulus: int) -> "AffineMap":
        """Build the identity map on Z_modulus.

        Args:
            modulus: Positive group order.
        """
        return cls(alpha = 1, beta = 0, modulus = modulus)

    def __call__(self, value: int) -> int:
        return (self.alpha * value + self.beta) % self.modulus

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """Return self after inner, x -> self(inner(x)).

        Args:
            inner: Map applied first.
        """
        if inner.modulus != self.modulus:
            raise ValueError(
                f"Modulus mismatch: {self.modulus} != {inner.modulus}"
            )
        return AffineMap(
            alpha = self.alpha * inner.alpha,
            beta = self.alpha * inner.beta + self.beta,
            modulus = self.modulus,
        )

    def inverse(self) -> "AffineMap":
        """Return the inverse map; alpha^-1 comes from extended Euclid."""
        if self.modulus == 1:
            return self
        alpha_inverse = pow(self.alpha, -1, self.modulus)
        return AffineMap(
            alpha = alpha_inverse,
            beta = -alpha_inverse * self.beta,
            modulus = self.modulus,
        )

    def format(self) -> str:
        """Render the map in the `aX+b` notation of the result tables."""
        head = "X" if self.alpha == 1 else f"{self.alpha}X"
        if self.beta == 0:
            return head
        return f"{head}+{self.beta}"


def apply_affine(f: AffineMap, s: ResidueSet) -> ResidueSet:
    """Return the sorted image f(S).

    Args:
        f: Affine map to apply.
        s: Source set with the same modulus.
    """
    if f.modulus != s.modulus:
        raise ValueError(f"Modulus mismatch: map {f.modulus} != set {s.modulus}")
    return ResidueSet.of((f(value) for value in s.elements), s.modulus)


def units(v: int) -> list[int]:
    """List the units of Z_v in ascending order.

    Args:
        v: Positive modulus.
    """
    if v < 1:
        raise ValueError(f"Modulus must be positive, got {v}")
    return [m for m in range(1, v) if math.gcd(m, v) == 1]


def lex_compare(s1: ResidueSet, s2: ResidueSet) -> Ordering:
    """Compare two sets by their sorted element sequences.

    Args:
        s1: Left operand.
        s2: Right operand with the same modulus.
    """
    if s1.modulus != s2.modulus:
        raise ValueError(f"Modulus mismatch: {s1.modulus} != {s2.modulus}")
    if s1.elements < s2.elements:
        return Ordering.LESS
    if s1.elements > s2.elements:
        return Ordering.GREATER
    return Ordering.EQUAL
