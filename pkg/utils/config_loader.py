import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv


OUTPUT_FORMATS = ("text", "json", "csv")


@dataclass(frozen = True)
class Settings:
    """Represent runtime tunables for the toolkit.

    Args:
        log_level: Textual logging level, only DEBUG enables output.
        output_format: One of text, json or csv.
        workers: Worker processes used by enumeration.
        a_max: Default upper bound for table reproduction.
        unit_filter: Whether enumeration applies the unit filter.
        preselect_half_pair: For odd a, force P_{v/2} into B before searching.
        timing: Whether reports include elapsed time.
    """

    log_level: str = "INFO"
    output_format: str = "text"
    workers: int = 1
    a_max: int = 12
    unit_filter: bool = True
    preselect_half_pair: bool = False
    timing: bool = True

    def __post_init__(self) -> None:
        if self.output_format not in OUTPUT_FORMATS:
            allowed = ", ".join(OUTPUT_FORMATS)
            raise ValueError(f"`output_format` must be one of {allowed}, got `{self.output_format}`")
        if self.workers < 1:
            raise ValueError(f"`workers` must be positive, got {self.workers}")
        if self.a_max < 1:
            raise ValueError(f"`a_max` must be positive, got {self.a_max}")


def load_env_file(env_path = ".env") -> None:
    """Load environment variables from .env file.

    Args:
        env_path: File path to the .env file.
    """
    load_dotenv(dotenv_path = env_path, override = False)


def resolve_settings_path(cli_settings_path = None) -> str:
    """Resolve settings path with command-line precedence.

    Args:
        cli_settings_path: Optional command line override path.
    """
    if cli_settings_path:
        return cli_settings_path

    env_settings_path = os.getenv("SEDF_LAB_SETTINGS_PATH")
    if env_settings_path:
        return env_settings_path

    default_path = Path("config/settings.yaml")
    if default_path.exists():
        return str(default_path)

    return "config/settings.example.yaml"


def _as_bool(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    normalized = str(value).strip().lower()
    if normalized in ("1", "true", "yes", "on"):
        return True
    if normalized in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"`{key}` must be a boolean, got `{value}`")


def _as_int(key: str, value: Any) -> int:
    try:
        return int(value)
    except (TypeError, ValueError) as error:
        raise ValueError(f"`{key}` must be an integer, got `{value}`") from error


def load_settings(settings_path: str) -> Settings:
    """Parse the settings YAML, falling back to defaults when the file is absent.

    Args:
        settings_path: YAML file path.
    """
    path = Path(settings_path)
    if not path.exists():
        return Settings()

    with path.open("r", encoding = "utf-8") as file:
        raw_config = yaml.safe_load(file) or {}
    if not isinstance(raw_config, dict):
        raise ValueError(f"Settings file {settings_path} must contain a mapping")

    unknown_keys = sorted(set(raw_config) - set(Settings.__dataclass_fields__))
    if unknown_keys:
        raise ValueError(f"Unknown settings keys in {settings_path}: {', '.join(unknown_keys)}")

    defaults = Settings()
    return Settings(
        log_level = str(raw_config.get("log_level", defaults.log_level)),
        output_format = str(raw_config.get("output_format", defaults.output_format)).lower(),
        workers = _as_int("workers", raw_config.get("workers", defaults.workers)),
        a_max = _as_int("a_max", raw_config.get("a_max", defaults.a_max)),
        unit_filter = _as_bool("unit_filter", raw_config.get("unit_filter", defaults.unit_filter)),
        preselect_half_pair = _as_bool(
            "preselect_half_pair",
            raw_config.get("preselect_half_pair", defaults.preselect_half_pair),
        ),
        timing = _as_bool("timing", raw_config.get("timing", defaults.timing)),
    )


def resolve_settings(
    settings: Settings,
    cli_log_level = None,
    cli_format = None,
    cli_workers = None,
    cli_timing = None,
) -> Settings:
    """Apply environment and command-line overrides, command line first.

    Args:
        settings: Settings loaded from YAML.
        cli_log_level: Optional log level from command line.
        cli_format: Optional output format from command line.
        cli_workers: Optional worker count from command line.
        cli_timing: Optional timing switch from command line.
    """
    workers = cli_workers
    if workers is None and os.getenv("SEDF_LAB_WORKERS"):
        workers = _as_int("SEDF_LAB_WORKERS", os.getenv("SEDF_LAB_WORKERS"))

    return replace(
        settings,
        log_level = cli_log_level or os.getenv("SEDF_LAB_LOG_LEVEL") or settings.log_level,
        output_format = (cli_format or os.getenv("SEDF_LAB_FORMAT") or settings.output_format).lower(),
        workers = settings.workers if workers is None else workers,
        timing = settings.timing if cli_timing is None else cli_timing,
    )
