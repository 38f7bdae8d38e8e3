"""
JSON loading for fit files and the optional run configuration.
"""
import json
import logging
from pathlib import Path

from errors import DataIOError, ParseError

logger = logging.getLogger(__name__)


def load_json(file_path: str | Path) -> dict:
    """
    Loads JSON data with error handling.

    Args:
        file_path: Path to the JSON file

    Returns:
        Dictionary with loaded data

    Raises:
        DataIOError: the file is missing or unreadable
        ParseError: the file is not valid JSON or not a JSON object
    """
    path = Path(file_path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise DataIOError(f"{path} not found.") from e
    except OSError as e:
        raise DataIOError(f"Could not read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"Could not decode {path}. Please check the JSON format. {e}") from e

    if not isinstance(data, dict):
        raise ParseError(f"{path} must contain a JSON object.")
    return data


def load_run_config(file_path: str | Path | None) -> dict:
    """
    Loads the optional run configuration file.

    The file holds one section per command, keyed by command name, whose
    entries mirror that command's flags (dashes or underscores both accepted).

    Returns:
        Mapping of command name to option defaults, empty when no file is given
    """
    if file_path is None:
        return {}
    raw = load_json(file_path)
    default_map = {}
    for command, options in raw.items():
        if not isinstance(options, dict):
            raise ParseError(f"Config section '{command}' must be an object.")
        default_map[command] = {key.replace('-', '_'): value for key, value in options.items()}
    logger.info("Loaded run config %s with sections %s", file_path, sorted(default_map))
    return default_map


def load_fit_json(file_path: str | Path) -> dict:
    """Loads a calibration JSON produced by the calibrate command."""
    data = load_json(file_path)
    if 'normal_fit' not in data:
        raise ParseError(f"{file_path} is not a fit file (missing 'normal_fit').")
    return data
