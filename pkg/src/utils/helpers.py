"""Helper functions for logging setup and report formatting."""

import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)


def setup_logging(level: int = logging.INFO,
                  log_file: Optional[Path] = None,
                  console_output: bool = True) -> None:
    """Setup logging configuration.

    Console output goes to stderr so stdout carries only report data.

    Args:
        level: Logging level
        log_file: Optional file path for logging
        console_output: Whether to log to the console
    """
    formatter = logging.Formatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    if console_output:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logger.debug(f"Logging configured - Level: {logging.getLevelName(level)}")


def format_float(value: float) -> str:
    """17 significant digits, enough to reproduce the double exactly."""
    return format(value, ".17g")


def json_safe(value: Any) -> Any:
    """Recursively replace NaN and infinities by their string names.

    JSON has no literal for them, and a failed numerical evaluation is
    reported rather than dropped.
    """
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def format_duration(seconds: float) -> str:
    """Format duration in seconds to human readable string.

    Args:
        seconds: Duration in seconds

    Returns:
        Human readable duration (e.g., '2m 30s')
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        mins = int(seconds // 60)
        secs = int(seconds % 60)
        return f"{mins}m {secs}s"
    else:
        hours = int(seconds // 3600)
        mins = int((seconds % 3600) // 60)
        return f"{hours}h {mins}m"


def flatten_dict(data: Dict[str, Any], parent_key: str = '', separator: str = '.') -> Dict[str, Any]:
    """Flatten nested dictionary.

    Lists of scalars are joined with ';' so every value fits one CSV cell.

    Args:
        data: Dictionary to flatten
        parent_key: Parent key prefix
        separator: Key separator

    Returns:
        Flattened dictionary
    """
    items: List[Tuple[str, Any]] = []

    for key, value in data.items():
        new_key = f"{parent_key}{separator}{key}" if parent_key else key

        if isinstance(value, dict):
            items.extend(flatten_dict(value, new_key, separator).items())
        elif isinstance(value, (list, tuple)):
            items.append((new_key, ";".join(format_cell(v) for v in value)))
        else:
            items.append((new_key, value))

    return dict(items)


def format_cell(value: Any) -> str:
    """CSV cell text: floats with 17 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (list, tuple)):
        return "[" + " ".join(format_cell(v) for v in value) + "]"
    return str(value)
