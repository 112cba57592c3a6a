import argparse
import logging

from rich.console import Console

from app.cli_runner import render_error, run
from service.table_service import TABLE_CHOICES
from utils.config_loader import OUTPUT_FORMATS, load_env_file, load_settings
from utils.config_loader import resolve_settings, resolve_settings_path
from utils.logger import setup_logging


logger = logging.getLogger(__name__)


def positive_int(text: str) -> int:
    """Parse a strictly positive integer flag.

    Args:
        text: Raw flag value.
    """
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got `{text}`") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Add shared command-line options to one parser.

    Args:
        parser: Target argparse parser instance.
    """
    parser.add_argument("--env-path", type = str, default = ".env")
    parser.add_argument("--settings-path", type = str, default = None)
    parser.add_argument("--log-level", type = str, default = None)
    parser.add_argument("--format", type = str, choices = OUTPUT_FORMATS, default = None)
    parser.add_argument("--output", type = str, default = None)
    parser.add_argument("--no-timing", dest = "timing", action = "store_const", const = False, default = None)


def add_input_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--input",
        type = str,
        default = None,
        help = "JSON file to read instead of standard input.",
    )


def build_parser() -> argparse.ArgumentParser:
    """Build the sedf-lab argument parser with all subcommands.

    Args:
        None: This function does not accept parameters.
    """
    parser = argparse.ArgumentParser(
        prog = "sedf-lab",
        description = "Strong external difference families, alpha-valuations and dihedral near-factorizations.",
    )
    subparsers = parser.add_subparsers(dest = "command", required = True)

    enumerate_parser = subparsers.add_parser("enumerate", help = "Enumerate inequivalent SEDFs for one a.")
    add_common_arguments(parser = enumerate_parser)
    enumerate_parser.add_argument("--a", type = positive_int, required = True)
    enumerate_parser.add_argument("--workers", type = positive_int, default = None)
    enumerate_parser.add_argument("--coverage", action = "store_true", help = "Attach blowup sequences.")
    enumerate_parser.add_argument("--no-unit-filter", action = "store_true")
    enumerate_parser.add_argument("--preselect-half-pair", action = "store_true")

    blowup_parser = subparsers.add_parser("blowup", help = "Compose a blowup sequence.")
    add_common_arguments(parser = blowup_parser)
    blowup_parser.add_argument("--sequence", type = str, required = True)
    blowup_parser.add_argument("--trace", action = "store_true")

    project_parser = subparsers.add_parser("project", help = "Project a valuation read as JSON.")
    add_common_arguments(parser = project_parser)
    add_input_argument(parser = project_parser)
    project_parser.add_argument("--kind", type = str, choices = ["I", "II"], required = True)

    for name, help_text in (
        ("classify", "Detect the structure of a valuation read as JSON."),
        ("canonical", "Canonical form of an SEDF read as JSON."),
        ("equivalent", "Test two SEDFs, read as a JSON list, for equivalence."),
        ("verify", "Verify an SEDF, valuation or dihedral pair read as JSON."),
    ):
        json_parser = subparsers.add_parser(name, help = help_text)
        add_common_arguments(parser = json_parser)
        add_input_argument(parser = json_parser)

    dihedral_parser = subparsers.add_parser("dihedral", help = "Dihedral constructions.")
    add_common_arguments(parser = dihedral_parser)
    dihedral_parser.add_argument("--k", type = positive_int, required = True)
    dihedral_parser.add_argument(
        "--n",
        type = positive_int,
        default = None,
        help = "Build the tile near-factorization of D_n instead of the SEDF.",
    )
    dihedral_parser.add_argument("--check-equivalence", action = "store_true")
    dihedral_parser.add_argument("--grid", action = "store_true")

    tables_parser = subparsers.add_parser("tables", help = "Reproduce the result tables.")
    add_common_arguments(parser = tables_parser)
    tables_parser.add_argument("--which", type = str, choices = TABLE_CHOICES, default = "table1")
    tables_parser.add_argument("--a-max", type = positive_int, default = None)
    tables_parser.add_argument("--workers", type = positive_int, default = None)

    brute_parser = subparsers.add_parser("brute-force", help = "Enumerate without symmetry assumptions.")
    add_common_arguments(parser = brute_parser)
    brute_parser.add_argument("--a", type = positive_int, required = True)

    sequences_parser = subparsers.add_parser("sequences", help = "Group alternating blowup sequences.")
    add_common_arguments(parser = sequences_parser)
    sequences_parser.add_argument("--a", type = positive_int, required = True)

    return parser


def parse_args(argv = None) -> argparse.Namespace:
    """Parse CLI arguments for sedf-lab entrypoint.

    Args:
        argv: Optional argument list, defaults to sys.argv.
    """
    return build_parser().parse_args(argv)


def main(argv = None) -> int:
    """Run sedf-lab main entrypoint and dispatch subcommands.

    Args:
        argv: Optional argument list, defaults to sys.argv.
    """
    args = parse_args(argv)

    try:
        load_env_file(env_path = args.env_path)
        settings_path = resolve_settings_path(cli_settings_path = args.settings_path)
        settings = resolve_settings(
            settings = load_settings(settings_path = settings_path),
            cli_log_level = args.log_level,
            cli_format = args.format,
            cli_workers = getattr(args, "workers", None),
            cli_timing = args.timing,
        )
    except Exception as exc:
        render_error(console = Console(stderr = True), message = f"Startup configuration failed: {exc}")
        return 1

    setup_logging(level_name = settings.log_level)
    logger.debug("Resolved settings: %s", settings)
    return run(args = args, settings = settings)


if __name__ == "__main__":
    raise SystemExit(main())
