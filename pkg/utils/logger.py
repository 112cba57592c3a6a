import logging
import sys


LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level_name = "INFO") -> None:
    """Configure logging so that reports stay clean unless DEBUG is requested.

    Any level other than DEBUG disables log output entirely. Under DEBUG the
    verifiers also run their cross-checks.

    Args:
        level_name: The textual logging level.
    """
    normalized_level = str(level_name or "").strip().upper()
    if normalized_level != "DEBUG":
        logging.disable(logging.CRITICAL)
        return

    logging.disable(logging.NOTSET)
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    if root_logger.handlers:
        return

    handler = logging.StreamHandler(stream = sys.stderr)
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(fmt = LOG_FORMAT))
    root_logger.addHandler(handler)
