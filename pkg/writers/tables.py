"""
Plotting tables: histogram, density overlay, Q-Q pairs and moment table.
"""
import logging
from pathlib import Path

import pandas as pd

from stats import Histogram
from utils import ensure_parent

logger = logging.getLogger(__name__)


def _write_frame(frame: pd.DataFrame, file_path) -> Path:
    path = ensure_parent(file_path)
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.info("Wrote %s (%d rows)", path, len(frame))
    return path


def write_histogram(h: Histogram, file_path) -> Path:
    return _write_frame(h.to_frame(), file_path)


def write_overlay(overlay: pd.DataFrame, file_path) -> Path:
    """Saves the overlay table (bin_center, empirical, one column per model)."""
    return _write_frame(overlay, file_path)


def write_qq(qq: pd.DataFrame, file_path) -> Path:
    return _write_frame(qq, file_path)


def write_moment_table(table: pd.DataFrame, file_path) -> Path:
    return _write_frame(table, file_path)
