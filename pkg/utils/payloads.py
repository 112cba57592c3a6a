from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from service.dihedral_service import DihedralElement, DihedralSubsetPair
from service.enumeration_service import CoverageMatch, EnumerationClass, EnumerationReport
from service.sedf_service import EquivalenceWitness, Sedf
from service.valuation_service import Valuation, format_sequence
from utils.residues import AffineMap
from utils.validity import ValidityReport


class ValuationPayload(BaseModel):
    """Represent one alpha-valuation of K_{a,b} in JSON form.

    Args:
        a: Size of the small side.
        b: Size of the large side.
        small: Labels of the small side.
        large: Labels of the large side.
    """

    a: int = Field(ge = 1)
    b: int = Field(ge = 1)
    small: list[int]
    large: list[int]

    @classmethod
    def from_domain(cls, valuation: Valuation) -> "ValuationPayload":
        return cls(
            a = valuation.a,
            b = valuation.b,
            small = list(valuation.small),
            large = list(valuation.large),
        )

    def to_domain(self) -> Valuation:
        """Build the domain object, rejecting declared sizes that disagree with the labels."""
        if self.a != len(self.small) or self.b != len(self.large):
            raise ValueError(
                f"Declared sizes ({self.a}, {self.b}) do not match label counts "
                f"({len(self.small)}, {len(self.large)})"
            )
        return Valuation.of(self.small, self.large)


class SedfPayload(BaseModel):
    """Represent a two-set family in Z_n in JSON form.

    Args:
        n: Group order.
        set_a: First set, serialized as "A".
        set_b: Second set, serialized as "B".
    """

    model_config = ConfigDict(populate_by_name = True)

    n: int = Field(ge = 1)
    set_a: list[int] = Field(alias = "A")
    set_b: list[int] = Field(alias = "B")

    @classmethod
    def from_domain(cls, sedf: Sedf) -> "SedfPayload":
        return cls(n = sedf.n, set_a = list(sedf.set_a.elements), set_b = list(sedf.set_b.elements))

    def to_domain(self) -> Sedf:
        """Build the domain object, rejecting members outside [0, n) or listed twice."""
        return Sedf.from_members(self.n, self.set_a, self.set_b)


class WitnessPayload(BaseModel):
    """Represent an affine equivalence x -> alpha x + beta with optional side swap.

    Args:
        alpha: Unit multiplier.
        beta: Translation.
        swapped: Whether the two sets exchange places.
    """

    alpha: int
    beta: int
    swapped: bool = False

    @classmethod
    def from_domain(cls, witness: EquivalenceWitness) -> "WitnessPayload":
        return cls(alpha = witness.map.alpha, beta = witness.map.beta, swapped = witness.swapped)

    @classmethod
    def from_map(cls, mapping: AffineMap) -> "WitnessPayload":
        return cls(alpha = mapping.alpha, beta = mapping.beta, swapped = False)

    def to_domain(self, modulus: int) -> EquivalenceWitness:
        return EquivalenceWitness(
            map = AffineMap(alpha = self.alpha, beta = self.beta, modulus = modulus),
            swapped = self.swapped,
        )


class ClassPayload(BaseModel):
    """Represent one enumerated class.

    Args:
        number: Row label "a.j".
        canonical: Canonical form.
        symmetric: Symmetric representative found by the search.
        map: Affine map from the symmetric representative to the canonical form.
        blowup_sequence: Witnessing blowup sequence, or None when not computed or NOT-alpha.
    """

    number: str
    canonical: SedfPayload
    symmetric: SedfPayload
    map: WitnessPayload
    blowup_sequence: str | None = None


class EnumerationPayload(BaseModel):
    """Represent an enumeration report.

    Args:
        a: Set size.
        count: Number of inequivalent classes.
        classes: One entry per class in canonical order.
        candidates_scanned: Candidate sets processed.
        solutions_found: Mates found before deduplication.
        elapsed_ms: Wall-clock milliseconds, omitted when timing is off.
    """

    a: int = Field(ge = 1)
    count: int = Field(ge = 0)
    classes: list[ClassPayload] = Field(default_factory = list)
    candidates_scanned: int = Field(ge = 0)
    solutions_found: int = Field(default = 0, ge = 0)
    elapsed_ms: int | None = None

    @classmethod
    def from_domain(
        cls,
        report: EnumerationReport,
        coverage: list[CoverageMatch] | None = None,
        timing: bool = True,
    ) -> "EnumerationPayload":
        """Build the JSON report from an enumeration and optional alpha coverage.

        Args:
            report: Enumeration result.
            coverage: Output of alpha_coverage, aligned with report.classes.
            timing: Whether to include elapsed_ms.
        """
        sequences: list[str | None] = [None] * len(report.classes)
        if coverage is not None:
            sequences = [
                format_sequence(list(match.steps)) if match.steps is not None else None
                for match in coverage
            ]
        return cls(
            a = report.a,
            count = len(report.classes),
            classes = [
                class_payload(a = report.a, position = position, item = item, sequence = sequence)
                for position, (item, sequence) in enumerate(zip(report.classes, sequences), start = 1)
            ],
            candidates_scanned = report.candidate_count,
            solutions_found = report.solution_count,
            elapsed_ms = round(report.elapsed * 1000) if timing else None,
        )


class ValidityPayload(BaseModel):
    valid: bool
    reason: str | None = None
    repeated: int | None = None
    missing: int | None = None

    @classmethod
    def from_domain(cls, report: ValidityReport) -> "ValidityPayload":
        return cls(
            valid = report.valid,
            reason = report.reason,
            repeated = report.repeated,
            missing = report.missing,
        )


class DihedralElementPayload(BaseModel):
    flip: int = Field(ge = 0, le = 1)
    rot: int = Field(ge = 0)

    @classmethod
    def from_domain(cls, element: DihedralElement) -> "DihedralElementPayload":
        return cls(flip = element.flip, rot = element.rot)

    def to_domain(self) -> DihedralElement:
        return DihedralElement(flip = self.flip, rot = self.rot)


class DihedralPairPayload(BaseModel):
    """Represent a pair of subsets of D_n in JSON form.

    Args:
        n: Order of the rotation subgroup.
        s: First subset, serialized as "S".
        t: Second subset, serialized as "T".
    """

    model_config = ConfigDict(populate_by_name = True)

    n: int = Field(ge = 1)
    s: list[DihedralElementPayload] = Field(alias = "S")
    t: list[DihedralElementPayload] = Field(alias = "T")

    @classmethod
    def from_domain(cls, pair: DihedralSubsetPair) -> "DihedralPairPayload":
        return cls(
            n = pair.n,
            s = [DihedralElementPayload.from_domain(g) for g in pair.s],
            t = [DihedralElementPayload.from_domain(g) for g in pair.t],
        )

    def to_domain(self) -> DihedralSubsetPair:
        return DihedralSubsetPair.from_members(
            n = self.n,
            s = [g.to_domain() for g in self.s],
            t = [g.to_domain() for g in self.t],
        )


def class_payload(a: int, position: int, item: EnumerationClass, sequence: str | None = None) -> ClassPayload:
    return ClassPayload(
        number = f"{a}.{position}",
        canonical = SedfPayload.from_domain(item.canonical),
        symmetric = SedfPayload.from_domain(item.symmetric),
        map = WitnessPayload.from_map(item.mapping),
        blowup_sequence = sequence,
    )


def dump_json(payload: BaseModel | list[BaseModel]) -> str:
    """Serialize one model, or a list of models, with aliases and two-space indent.

    Args:
        payload: Model or list of models.
    """
    if isinstance(payload, list):
        adapter = TypeAdapter(list[type(payload[0])]) if payload else TypeAdapter(list[BaseModel])
        return adapter.dump_json(payload, indent = 2, by_alias = True).decode("utf-8")
    return payload.model_dump_json(indent = 2, by_alias = True)


class TableRowPayload(BaseModel):
    """Represent one reproduced table row.

    Args:
        number: Row label "a.j".
        canonical: Canonical form of the class.
        symmetric: Symmetric representative in pair notation (first table only).
        mapping: Affine map "alpha X + beta" to the canonical form (first table only).
        blowup_sequence: Blowup sequence or "NOT-alpha" (second table only).
    """

    number: str
    canonical: SedfPayload
    symmetric: str | None = None
    mapping: str | None = None
    blowup_sequence: str | None = None


class TablePayload(BaseModel):
    which: str
    a_max: int = Field(ge = 1)
    rows: list[TableRowPayload] = Field(default_factory = list)


class CanonicalPayload(BaseModel):
    canonical: SedfPayload
    witness: WitnessPayload


class EquivalencePayload(BaseModel):
    equivalent: bool
    witness: WitnessPayload | None = None


class StructurePayload(BaseModel):
    """Represent a detected structure, or the outcome of one projection.

    Args:
        kind: TypeI, TypeII or Trivial for classification; I or II for projection.
        ell: Run length when present.
        valuation: Projected valuation, projection only.
    """

    kind: str
    ell: int | None = None
    valuation: ValuationPayload | None = None


class BruteForcePayload(BaseModel):
    a: int = Field(ge = 1)
    count: int = Field(ge = 0)
    classes: list[SedfPayload] = Field(default_factory = list)


class SequenceGroupPayload(BaseModel):
    canonical: SedfPayload
    sequences: list[str]


class DihedralReportPayload(BaseModel):
    """Represent the dihedral subcommand output.

    Args:
        k: Size parameter.
        n: Order of the rotation subgroup.
        pair: Constructed pair.
        valid: Whether the pair verifies.
        reason: Failure reason when invalid.
        h: Witness element when equivalence was checked.
        equivalent: Whether the two constructions were shown equivalent.
    """

    k: int
    n: int
    pair: DihedralPairPayload
    valid: bool
    reason: str | None = None
    h: str | None = None
    equivalent: bool | None = None
