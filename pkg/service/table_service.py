import csv
import io
import logging
from dataclasses import dataclass, field

from rich.table import Table

from service.enumeration_service import EnumerationReport, alpha_coverage, enumerate_sedfs, pairs_of
from service.sedf_service import Sedf
from service.valuation_service import format_sequence
from utils.payloads import SedfPayload, TablePayload, TableRowPayload, dump_json
from utils.residues import ResidueSet


logger = logging.getLogger(__name__)

TABLE_CHOICES = ("table1", "table2")
SUPPORTED_A_MAX = 14
NOT_ALPHA = "NOT-alpha"


@dataclass
class TableRow:
    """Represent one row of a reproduced table.

    Args:
        number: Row label "a.j", numbered in ascending canonical order within a.
        canonical: Canonical form of the class.
        symmetric: Symmetric representative in pair notation.
        mapping: Affine map from the symmetric representative to the canonical form.
        blowup_sequence: Witnessing blowup sequence, or NOT-alpha.
    """

    number: str
    canonical: Sedf
    symmetric: str | None = None
    mapping: str | None = None
    blowup_sequence: str | None = None


@dataclass
class TableDocument:
    which: str
    a_max: int
    rows: list[TableRow] = field(default_factory = list)
    reports: list[EnumerationReport] = field(default_factory = list)


def format_residue_set(s: ResidueSet) -> str:
    return "{" + ",".join(str(value) for value in s.elements) + "}"


def format_pair_notation(s: ResidueSet) -> str:
    """Render a symmetric set as "{P_0,P_1}".

    Args:
        s: Set closed under negation.
    """
    return "{" + ",".join(f"P_{x}" for x in pairs_of(s)) + "}"


def format_sedf(s: Sedf) -> str:
    return f"({format_residue_set(s.set_a)}, {format_residue_set(s.set_b)})"


def a_max_warning(a_max: int) -> str | None:
    """Return the long-run warning for a_max beyond the supported range, or None.

    Args:
        a_max: Largest a to enumerate.
    """
    if a_max <= SUPPORTED_A_MAX:
        return None
    return f"a_max={a_max} is beyond {SUPPORTED_A_MAX}; enumeration may run for days"


def reproduce_tables(
    which: str,
    a_max: int,
    workers: int = 1,
    unit_filter: bool = True,
    preselect_half_pair: bool = False,
) -> TableDocument:
    """Enumerate every a up to a_max and collect the rows of one table.

    Args:
        which: table1 for classes with representatives and maps, table2 for blowup sequences.
        a_max: Largest a to enumerate.
        workers: Worker processes passed to enumeration.
        unit_filter: Whether enumeration applies the unit filter.
        preselect_half_pair: For odd a, force P_{v/2} into B.
    """
    if which not in TABLE_CHOICES:
        raise ValueError(f"Unknown table `{which}`, expected one of {', '.join(TABLE_CHOICES)}")
    if a_max < 1:
        raise ValueError(f"a_max must be positive, got {a_max}")
    warning = a_max_warning(a_max)
    if warning is not None:
        logger.warning(warning)

    document = TableDocument(which = which, a_max = a_max)
    for a in range(1, a_max + 1):
        report = enumerate_sedfs(
            a = a,
            workers = workers,
            unit_filter = unit_filter,
            preselect_half_pair = preselect_half_pair,
        )
        document.reports.append(report)
        if which == "table1":
            for position, item in enumerate(report.classes, start = 1):
                document.rows.append(
                    TableRow(
                        number = f"{a}.{position}",
                        canonical = item.canonical,
                        symmetric = (
                            f"{format_pair_notation(item.symmetric.set_a)},"
                            f"{format_pair_notation(item.symmetric.set_b)}"
                        ),
                        mapping = item.mapping.format(),
                    )
                )
        else:
            for position, match in enumerate(alpha_coverage(report), start = 1):
                sequence = format_sequence(list(match.steps)) if match.steps is not None else NOT_ALPHA
                document.rows.append(
                    TableRow(number = f"{a}.{position}", canonical = match.sedf, blowup_sequence = sequence)
                )
    return document


def table_to_payload(document: TableDocument) -> TablePayload:
    return TablePayload(
        which = document.which,
        a_max = document.a_max,
        rows = [
            TableRowPayload(
                number = row.number,
                canonical = SedfPayload.from_domain(row.canonical),
                symmetric = row.symmetric,
                mapping = row.mapping,
                blowup_sequence = row.blowup_sequence,
            )
            for row in document.rows
        ],
    )


def table_to_json(document: TableDocument) -> str:
    return dump_json(table_to_payload(document))


def table_to_csv(document: TableDocument) -> str:
    """Render one row per class, mirroring the printed table columns.

    Args:
        document: Reproduced table.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator = "\n")
    if document.which == "table1":
        writer.writerow(["number", "symmetric", "canonical", "mapping"])
        for row in document.rows:
            writer.writerow([row.number, row.symmetric, format_sedf(row.canonical), row.mapping])
    else:
        writer.writerow(["number", "blowup_sequence", "canonical"])
        for row in document.rows:
            writer.writerow([row.number, row.blowup_sequence, format_sedf(row.canonical)])
    return buffer.getvalue()


def table_to_rich(document: TableDocument) -> Table:
    """Build a rich table for terminal output.

    Args:
        document: Reproduced table.
    """
    if document.which == "table1":
        table = Table(title = "Inequivalent SEDFs", header_style = "bold cyan")
        table.add_column("Number", style = "green")
        table.add_column("Symmetric")
        table.add_column("Canonical")
        table.add_column("Mapping", justify = "right")
        for row in document.rows:
            table.add_row(row.number, row.symmetric, format_sedf(row.canonical), row.mapping)
        return table

    table = Table(title = "SEDFs and Blowup Sequences", header_style = "bold cyan")
    table.add_column("Number", style = "green")
    table.add_column("Blowup Sequence")
    table.add_column("Canonical")
    for row in document.rows:
        style = "red" if row.blowup_sequence == NOT_ALPHA else None
        table.add_row(row.number, row.blowup_sequence, format_sedf(row.canonical), style = style)
    return table
