import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, TextIO

from pydantic import BaseModel, TypeAdapter
from rich.console import Console, RenderableType
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from service.dihedral_service import cghk_construction, equivalence_witness, format_element
from service.dihedral_service import format_elements, hjn_construction, near_factorizations_equivalent
from service.dihedral_service import render_grid, sedf_near_factorization, verify_dihedral_sedf
from service.dihedral_service import verify_near_factorization
from service.enumeration_service import alpha_coverage, brute_force_sedfs, enumerate_sedfs, group_sequences
from service.sedf_service import canonical_form, equivalent, verify_sedf
from service.table_service import a_max_warning, format_pair_notation, format_sedf, reproduce_tables
from service.table_service import table_to_csv, table_to_payload, table_to_rich
from service.valuation_service import BlowupKind, blowup_trace, compose, detect_structure
from service.valuation_service import format_sequence, parse_sequence, project, verify_valuation
from utils.config_loader import Settings
from utils.payloads import BruteForcePayload, CanonicalPayload, DihedralPairPayload, DihedralReportPayload
from utils.payloads import EnumerationPayload, EquivalencePayload, SedfPayload, SequenceGroupPayload
from utils.payloads import StructurePayload, ValidityPayload, ValuationPayload, WitnessPayload, dump_json
from utils.validity import ValidityReport


logger = logging.getLogger(__name__)


@dataclass
class CommandResult:
    """Hold one command outcome in every output format.

    Args:
        renderables: Rich objects printed in text mode.
        payload: Pydantic model (or list of models) emitted in json mode.
        csv_rows: Rows emitted in csv mode, header first.
        csv_document: Ready-made csv text, used instead of csv_rows when set.
        exit_code: Process status once the result is written.
    """

    renderables: list[RenderableType] = field(default_factory = list)
    payload: BaseModel | list[BaseModel] | None = None
    csv_rows: list[list[Any]] = field(default_factory = list)
    csv_document: str | None = None
    exit_code: int = 0


def render_error(console: Console, message: str) -> None:
    """Render an error panel.

    Args:
        console: Rich console instance.
        message: Error message string.
    """
    console.print(
        Panel(
            Text(message, style = "red"),
            title = "Error",
            border_style = "red",
            expand = False,
        )
    )


def render_warning(console: Console, message: str) -> None:
    """Render a one-line warning.

    Args:
        console: Rich console instance.
        message: Warning message string.
    """
    console.print(Text(f"Warning: {message}", style = "yellow"))


def read_input_text(args: argparse.Namespace, stdin: TextIO) -> str:
    """Read JSON input from --input or standard input.

    Args:
        args: Parsed command-line arguments.
        stdin: Fallback input stream.
    """
    input_path = getattr(args, "input", None)
    text = Path(input_path).read_text(encoding = "utf-8") if input_path else stdin.read()
    if not text.strip():
        raise ValueError("No JSON input provided")
    return text


def require_valid(report: ValidityReport, subject: str) -> None:
    """Raise ValueError when a command input fails its validity check.

    Args:
        report: Outcome of the verify call.
        subject: What was checked, used in the message.
    """
    if not report.valid:
        raise ValueError(f"Input is not a valid {subject}: {report.reason}")


def validity_text(report: ValidityReport) -> Text:
    if report.valid:
        return Text("valid", style = "green")
    return Text(f"invalid: {report.reason}", style = "red")


def handle_enumerate(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    report = enumerate_sedfs(
        a = args.a,
        workers = settings.workers,
        unit_filter = settings.unit_filter and not args.no_unit_filter,
        preselect_half_pair = settings.preselect_half_pair or args.preselect_half_pair,
    )
    coverage = alpha_coverage(report) if args.coverage else None
    payload = EnumerationPayload.from_domain(report = report, coverage = coverage, timing = settings.timing)

    table = Table(title = f"Inequivalent SEDFs for a={report.a}", header_style = "bold cyan")
    table.add_column("Number", style = "green")
    table.add_column("Symmetric")
    table.add_column("Canonical")
    table.add_column("Mapping", justify = "right")
    if coverage is not None:
        table.add_column("Blowup Sequence")

    header = ["number", "symmetric", "canonical", "mapping"]
    rows: list[list[Any]] = [header + (["blowup_sequence"] if coverage is not None else [])]
    for item, class_payload in zip(report.classes, payload.classes):
        cells = [
            class_payload.number,
            f"{format_pair_notation(item.symmetric.set_a)},{format_pair_notation(item.symmetric.set_b)}",
            format_sedf(item.canonical),
            item.mapping.format(),
        ]
        if coverage is not None:
            cells.append(class_payload.blowup_sequence or "NOT-alpha")
        table.add_row(*cells)
        rows.append(cells)

    summary = f"{len(report.classes)} classes, {report.candidate_count} candidates, {report.solution_count} mates"
    if settings.timing:
        summary += f", {report.elapsed:.2f}s"
    return CommandResult(renderables = [table, Text(summary, style = "dim")], payload = payload, csv_rows = rows)


def handle_blowup(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    steps = parse_sequence(args.sequence)
    valuation = compose(steps)
    report = verify_valuation(valuation)

    renderables: list[RenderableType] = []
    if args.trace:
        table = Table(title = f"Blowup {format_sequence(steps)}", header_style = "bold cyan")
        table.add_column("Step", style = "green")
        table.add_column("Scaled")
        table.add_column("Result")
        for step, scaled, result in blowup_trace(steps):
            table.add_row(
                f"{step.kind.value}:{step.ell}",
                f"{list(scaled.small)} / {list(scaled.large)}",
                f"{list(result.small)} / {list(result.large)}",
            )
        renderables.append(table)
    renderables.append(
        Panel(
            Text(f"small = {list(valuation.small)}\nlarge = {list(valuation.large)}"),
            title = f"K_{{{valuation.a},{valuation.b}}}",
            border_style = "cyan",
            expand = False,
        )
    )
    renderables.append(validity_text(report))
    return CommandResult(
        renderables = renderables,
        payload = ValuationPayload.from_domain(valuation),
        csv_rows = [["side", "labels"], ["small", " ".join(map(str, valuation.small))],
                    ["large", " ".join(map(str, valuation.large))]],
    )


def handle_project(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    valuation = ValuationPayload.model_validate_json(read_input_text(args = args, stdin = stdin)).to_domain()
    require_valid(verify_valuation(valuation), "alpha-valuation")
    projected, ell = project(valuation, BlowupKind(args.kind))
    payload = StructurePayload(kind = args.kind, ell = ell, valuation = ValuationPayload.from_domain(projected))
    return CommandResult(
        renderables = [
            Text(f"Projection {args.kind} with ell={ell}"),
            Text(f"small = {list(projected.small)}\nlarge = {list(projected.large)}"),
        ],
        payload = payload,
        csv_rows = [["kind", "ell", "small", "large"],
                    [args.kind, ell, " ".join(map(str, projected.small)), " ".join(map(str, projected.large))]],
    )


def handle_classify(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    valuation = ValuationPayload.model_validate_json(read_input_text(args = args, stdin = stdin)).to_domain()
    require_valid(verify_valuation(valuation), "alpha-valuation")
    structure = detect_structure(valuation)
    label = structure.kind.value if structure.ell is None else f"{structure.kind.value}(ell={structure.ell})"
    return CommandResult(
        renderables = [Text(label, style = "bold")],
        payload = StructurePayload(kind = structure.kind.value, ell = structure.ell),
        csv_rows = [["kind", "ell"], [structure.kind.value, "" if structure.ell is None else structure.ell]],
    )


def handle_canonical(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    sedf = SedfPayload.model_validate_json(read_input_text(args = args, stdin = stdin)).to_domain()
    require_valid(verify_sedf(sedf), "SEDF")
    canonical, witness = canonical_form(sedf)
    swap_note = " with sides swapped" if witness.swapped else ""
    return CommandResult(
        renderables = [Text(f"{format_sedf(canonical)} via {witness.map.format()}{swap_note}")],
        payload = CanonicalPayload(
            canonical = SedfPayload.from_domain(canonical),
            witness = WitnessPayload.from_domain(witness),
        ),
        csv_rows = [["canonical", "alpha", "beta", "swapped"],
                    [format_sedf(canonical), witness.map.alpha, witness.map.beta, witness.swapped]],
    )


def handle_equivalent(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    pair = TypeAdapter(list[SedfPayload]).validate_json(read_input_text(args = args, stdin = stdin))
    if len(pair) != 2:
        raise ValueError(f"Expected a JSON list of two SEDFs, got {len(pair)}")
    first, second = pair[0].to_domain(), pair[1].to_domain()
    for position, sedf in enumerate((first, second), start = 1):
        require_valid(verify_sedf(sedf), f"SEDF at position {position}")
    witness = equivalent(first, second)
    if witness is None:
        return CommandResult(
            renderables = [Text("not equivalent", style = "yellow")],
            payload = EquivalencePayload(equivalent = False),
            csv_rows = [["equivalent", "alpha", "beta", "swapped"], [False, "", "", ""]],
        )
    swap_note = " with sides swapped" if witness.swapped else ""
    return CommandResult(
        renderables = [Text(f"equivalent via {witness.map.format()}{swap_note}", style = "green")],
        payload = EquivalencePayload(equivalent = True, witness = WitnessPayload.from_domain(witness)),
        csv_rows = [["equivalent", "alpha", "beta", "swapped"],
                    [True, witness.map.alpha, witness.map.beta, witness.swapped]],
    )


def handle_verify(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    raw = json.loads(read_input_text(args = args, stdin = stdin))
    if not isinstance(raw, dict):
        raise ValueError("Expected a JSON object")
    if "small" in raw:
        report = verify_valuation(ValuationPayload.model_validate(raw).to_domain())
    elif "S" in raw:
        report = verify_near_factorization(DihedralPairPayload.model_validate(raw).to_domain())
    else:
        report = verify_sedf(SedfPayload.model_validate(raw).to_domain())
    return CommandResult(
        renderables = [validity_text(report)],
        payload = ValidityPayload.from_domain(report),
        csv_rows = [["valid", "reason", "repeated", "missing"],
                    [report.valid, report.reason or "", report.repeated or "", report.missing or ""]],
        exit_code = 0 if report.valid else 1,
    )


def handle_dihedral(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    if args.n is not None:
        pair = cghk_construction(n = args.n, k = args.k)
        report = verify_near_factorization(pair)
        labels = ("A", "B")
    else:
        pair = hjn_construction(args.k)
        report = verify_dihedral_sedf(pair.n, pair.s, pair.t)
        labels = ("A1", "A2")

    lines = [
        f"D_{pair.n}",
        f"{labels[0]} = {format_elements(pair.s)}",
        f"{labels[1]} = {format_elements(pair.t)}",
    ]
    payload = DihedralReportPayload(
        k = args.k,
        n = pair.n,
        pair = DihedralPairPayload.from_domain(pair),
        valid = report.valid,
        reason = report.reason,
    )
    if args.check_equivalence:
        transcript = equivalence_witness(args.k)
        witness = near_factorizations_equivalent(
            cghk_construction(n = transcript.n, k = args.k),
            sedf_near_factorization(hjn_construction(args.k)),
        )
        payload.h = format_element(transcript.h)
        payload.equivalent = witness is not None
        lines.append(f"h = {payload.h}")
        lines.append(f"A1 h = {format_elements(transcript.left)}")
        lines.append(f"h A2^-1 = {format_elements(transcript.right)}")
        lines.append("equivalent" if witness is not None else "not equivalent")

    renderables: list[RenderableType] = [
        Panel(Text("\n".join(lines)), title = "Dihedral", border_style = "cyan", expand = False),
        validity_text(report),
    ]
    if args.grid:
        for label, elements in zip(labels, (pair.s, pair.t)):
            renderables.append(Text(f"{label}:\n{render_grid(pair.n, elements)}"))

    rows = [["set", "elements"], [labels[0], format_elements(pair.s)], [labels[1], format_elements(pair.t)]]
    if payload.h is not None:
        rows.append(["h", payload.h])
    return CommandResult(
        renderables = renderables,
        payload = payload,
        csv_rows = rows,
        exit_code = 0 if report.valid else 1,
    )


def handle_tables(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    a_max = args.a_max or settings.a_max
    warning = a_max_warning(a_max)
    if warning is not None:
        render_warning(console = Console(stderr = True), message = warning)
    document = reproduce_tables(
        which = args.which,
        a_max = a_max,
        workers = settings.workers,
        unit_filter = settings.unit_filter,
        preselect_half_pair = settings.preselect_half_pair,
    )
    return CommandResult(
        renderables = [table_to_rich(document)],
        payload = table_to_payload(document),
        csv_document = table_to_csv(document),
    )


def handle_brute_force(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    classes = brute_force_sedfs(args.a)
    table = Table(title = f"Brute-force classes for a={args.a}", header_style = "bold cyan")
    table.add_column("Number", style = "green")
    table.add_column("Canonical")
    rows: list[list[Any]] = [["number", "canonical"]]
    for position, sedf in enumerate(classes, start = 1):
        cells = [f"{args.a}.{position}", format_sedf(sedf)]
        table.add_row(*cells)
        rows.append(cells)
    return CommandResult(
        renderables = [table],
        payload = BruteForcePayload(
            a = args.a,
            count = len(classes),
            classes = [SedfPayload.from_domain(sedf) for sedf in classes],
        ),
        csv_rows = rows,
    )


def handle_sequences(args: argparse.Namespace, settings: Settings, stdin: TextIO) -> CommandResult:
    groups = group_sequences(args.a)
    table = Table(title = f"Blowup sequences for a={args.a}", header_style = "bold cyan")
    table.add_column("Canonical")
    table.add_column("Sequences")
    payload: list[BaseModel] = []
    rows: list[list[Any]] = [["canonical", "sequences"]]
    for canonical, sequences in groups.items():
        formatted = [format_sequence(list(steps)) for steps in sequences]
        table.add_row(format_sedf(canonical), " ~ ".join(formatted))
        rows.append([format_sedf(canonical), " ".join(formatted)])
        payload.append(SequenceGroupPayload(canonical = SedfPayload.from_domain(canonical), sequences = formatted))
    return CommandResult(renderables = [table], payload = payload, csv_rows = rows)


COMMAND_HANDLERS: dict[str, Callable[[argparse.Namespace, Settings, TextIO], CommandResult]] = {
    "enumerate": handle_enumerate,
    "blowup": handle_blowup,
    "project": handle_project,
    "classify": handle_classify,
    "canonical": handle_canonical,
    "equivalent": handle_equivalent,
    "verify": handle_verify,
    "dihedral": handle_dihedral,
    "tables": handle_tables,
    "brute-force": handle_brute_force,
    "sequences": handle_sequences,
}


def rows_to_csv(rows: list[list[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator = "\n")
    writer.writerows(rows)
    return buffer.getvalue()


def write_result(
    result: CommandResult,
    output_format: str,
    console: Console,
    output_path: str | None = None,
) -> None:
    """Write one result in the selected format to the console or a file.

    Args:
        result: Command outcome.
        output_format: text, json or csv.
        console: Console used when no output path is given.
        output_path: Optional destination file, parent directories created.
    """
    if output_format == "json":
        document = dump_json(result.payload) + "\n"
    elif output_format == "csv":
        document = result.csv_document if result.csv_document is not None else rows_to_csv(result.csv_rows)
    else:
        document = None

    if output_path:
        path = Path(output_path)
        path.parent.mkdir(parents = True, exist_ok = True)
        with path.open("w", encoding = "utf-8", newline = "") as file:
            if document is not None:
                file.write(document)
            else:
                file_console = Console(file = file, width = 120, color_system = None)
                for renderable in result.renderables:
                    file_console.print(renderable)
        logger.debug("Wrote %s output to %s", output_format, path)
        return

    if document is not None:
        console.out(document, end = "", highlight = False)
        return
    for renderable in result.renderables:
        console.print(renderable)


def run(
    args: argparse.Namespace,
    settings: Settings,
    stdin: TextIO | None = None,
    console: Console | None = None,
    error_console: Console | None = None,
) -> int:
    """Dispatch one parsed subcommand and write its output.

    Args:
        args: Parsed command-line arguments.
        settings: Resolved settings.
        stdin: Input stream for JSON objects.
        console: Output console.
        error_console: Console for error panels.
    """
    stdin = stdin or sys.stdin
    console = console or Console()
    error_console = error_console or Console(stderr = True)

    handler = COMMAND_HANDLERS.get(args.command)
    if handler is None:
        render_error(console = error_console, message = f"Unsupported command: {args.command}")
        return 2

    try:
        result = handler(args, settings, stdin)
    except (ValueError, OSError) as exc:
        logger.debug("Command %s failed", args.command, exc_info = True)
        render_error(console = error_console, message = str(exc))
        return 1

    write_result(
        result = result,
        output_format = settings.output_format,
        console = console,
        output_path = getattr(args, "output", None),
    )
    return result.exit_code
