"""
JSON artifacts: fit files and the full report.
"""
import json
import logging
from pathlib import Path

from diagnostics import FitReport
from utils import ensure_parent

logger = logging.getLogger(__name__)


def write_json(data: dict, file_path) -> Path:
    """Writes a dict as indented JSON; NaN is rejected."""
    path = ensure_parent(file_path)
    path.write_text(json.dumps(data, indent=2, allow_nan=False) + '\n', encoding='utf-8')
    logger.info("Wrote %s", path)
    return path


def write_report(report: FitReport, file_path) -> Path:
    path = ensure_parent(file_path)
    path.write_text(report.to_json() + '\n', encoding='utf-8')
    logger.info("Wrote fit report to %s", path)
    return path
