"""
Price and return series as `date,value` CSV.
"""
import logging
from pathlib import Path

import pandas as pd

from market_data import PriceSeries, ReturnSeries
from utils import ensure_parent

logger = logging.getLogger(__name__)


def _write_series(values: pd.Series, file_path, column: str = 'value') -> Path:
    path = ensure_parent(file_path)
    frame = values.rename(column).to_frame()
    if isinstance(frame.index, pd.DatetimeIndex):
        frame.index = frame.index.strftime('%Y-%m-%d')
        frame.index.name = 'date'
    elif frame.index.name is None:
        frame.index.name = 'step'
    frame.to_csv(path, index=True, lineterminator='\n')
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


def write_price_series(p: PriceSeries, file_path, column: str = 'value') -> Path:
    """
    Saves prices with their dates (or step numbers).

    Args:
        p: Price series
        file_path: Destination CSV
        column: Header of the price column

    Returns:
        Path of the written file
    """
    return _write_series(p.prices, file_path, column)


def write_return_series(r: ReturnSeries, file_path) -> Path:
    """Saves log-returns in the format load_returns_csv reads back."""
    return _write_series(r.values, file_path)
