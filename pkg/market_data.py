"""
Price series loading and log-return derivation.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

import numpy as np
import pandas as pd

from config import CSV_SCHEMA, TIME_STEP_DAYS
from errors import DataIOError, DomainError, InsufficientDataError, ParseError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CsvSchema:
    """Column names and date format of a price CSV."""

    date_column: str = CSV_SCHEMA['date_column']
    price_column: str = CSV_SCHEMA['price_column']
    date_format: str | None = CSV_SCHEMA['date_format']


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Strictly positive prices on strictly increasing dates."""

    prices: pd.Series

    def __post_init__(self):
        prices = pd.Series(self.prices, dtype=float).copy()
        prices.index.name = 'date'
        prices.name = 'price'
        if prices.empty:
            raise InsufficientDataError("A price series needs at least one observation.")
        if not np.all(np.isfinite(prices.to_numpy())) or (prices <= 0).any():
            raise DomainError("Prices must be finite and strictly positive.")
        if not prices.index.is_monotonic_increasing or not prices.index.is_unique:
            raise DomainError("Price timestamps must be strictly increasing.")
        object.__setattr__(self, 'prices', prices)

    def __len__(self) -> int:
        return len(self.prices)

    @property
    def values(self) -> np.ndarray:
        return self.prices.to_numpy()

    @property
    def dates(self) -> pd.Index:
        return self.prices.index


@dataclass(frozen=True, eq=False)
class ReturnSeries:
    """Finite log-returns sampled every `dt` days."""

    values: pd.Series
    dt: float = field(default=TIME_STEP_DAYS)

    def __post_init__(self):
        values = pd.Series(self.values, dtype=float).copy()
        values.name = 'value'
        if not np.all(np.isfinite(values.to_numpy())):
            raise DomainError("Returns must be finite.")
        if self.dt <= 0:
            raise DomainError(f"Time step must be positive, got {self.dt}.")
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_values(cls, values, dt: float = TIME_STEP_DAYS) -> 'ReturnSeries':
        """Builds a return series indexed by step number."""
        array = np.asarray(values, dtype=float)
        return cls(pd.Series(array, index=pd.RangeIndex(len(array), name='step')), dt)

    def __len__(self) -> int:
        return len(self.values)

    def to_numpy(self) -> np.ndarray:
        return self.values.to_numpy()


def _read_csv(source: str | Path | IO[str], what: str) -> pd.DataFrame:
    try:
        return pd.read_csv(source, dtype=str, skipinitialspace=True)
    except FileNotFoundError as e:
        raise DataIOError(f"{source} not found.") from e
    except pd.errors.EmptyDataError as e:
        raise ParseError(f"{what.capitalize()} input is empty (no header).") from e
    except pd.errors.ParserError as e:
        raise ParseError(f"Could not parse {what} input: {e}") from e
    except OSError as e:
        raise DataIOError(f"Could not read {source}: {e}") from e


def load_price_csv(source: str | Path | IO[str], config: CsvSchema | None = None) -> tuple:
    """
    Loads a price series from delimited text.

    Rows with a missing date or a missing/non-positive price are dropped and
    counted. Duplicate dates keep their last occurrence. Rows are returned
    sorted by date.

    Args:
        source: Path or open text stream
        config: Column names and date format

    Returns:
        Tuple of (PriceSeries, dropped_row_count)
    """
    config = config or CsvSchema()
    df = _read_csv(source, 'price')

    missing = [col for col in (config.date_column, config.price_column) if col not in df.columns]
    if missing:
        raise ParseError(
            f"Malformed header: missing column(s) {missing}; found {list(df.columns)}."
        )

    raw_dates = df[config.date_column]
    dates = pd.to_datetime(raw_dates, format=config.date_format, errors='coerce')
    bad_dates = dates.isna() & raw_dates.notna() & (raw_dates.str.strip() != '')
    if bad_dates.any():
        first = raw_dates[bad_dates].iloc[0]
        raise ParseError(f"Unparseable date '{first}' in column '{config.date_column}'.")

    prices = pd.to_numeric(df[config.price_column], errors='coerce')
    valid = dates.notna() & prices.notna() & np.isfinite(prices) & (prices > 0)
    dropped = int((~valid).sum())

    frame = pd.DataFrame({'date': dates[valid], 'price': prices[valid]})
    # Keep the last occurrence of a repeated date, as corrected feeds do
    frame = frame.drop_duplicates('date', keep='last').sort_values('date', kind='stable')
    if len(frame) < 2:
        raise InsufficientDataError(
            f"Only {len(frame)} valid price row(s); at least 2 are required."
        )

    logger.info("Loaded %d price rows (%d dropped)", len(frame), dropped)
    return PriceSeries(frame.set_index('date')['price']), dropped


def load_returns_csv(source: str | Path | IO[str]) -> ReturnSeries:
    """
    Loads a `date,value` (or `step,value`) returns file.

    Returns:
        ReturnSeries indexed by the first column
    """
    df = _read_csv(source, 'returns')
    if 'value' not in df.columns or len(df.columns) < 2:
        raise ParseError(f"Malformed header: expected '<index>,value', found {list(df.columns)}.")
    values = pd.to_numeric(df['value'], errors='coerce')
    if values.isna().any():
        raise ParseError("Returns file contains missing or non-numeric values.")
    index_col = df.columns[0]
    if index_col == 'date':
        index = pd.DatetimeIndex(pd.to_datetime(df['date'], errors='raise'), name='date')
    else:
        index = pd.RangeIndex(len(df), name='step')
    return ReturnSeries(pd.Series(values.to_numpy(), index=index))


def log_returns(p: PriceSeries) -> ReturnSeries:
    """
    Computes daily log-returns ln(S_t / S_{t-1}).

    Args:
        p: Price series with at least two observations

    Returns:
        ReturnSeries dated by the later price of each pair
    """
    if len(p) < 2:
        raise InsufficientDataError("Log-returns need at least two prices.")
    prices = p.values
    values = np.log(prices[1:] / prices[:-1])
    return ReturnSeries(pd.Series(values, index=p.dates[1:]), TIME_STEP_DAYS)


def simple_returns(p: PriceSeries) -> pd.Series:
    """Computes simple returns (S_t - S_{t-1}) / S_{t-1}."""
    if len(p) < 2:
        raise InsufficientDataError("Simple returns need at least two prices.")
    prices = p.values
    return pd.Series((prices[1:] - prices[:-1]) / prices[:-1], index=p.dates[1:], name='value')


def normalize_prices(p: PriceSeries, base: float) -> PriceSeries:
    """
    Rescales a price series so that it starts at `base`.

    Args:
        p: Price series
        base: Positive starting value

    Returns:
        Scaled PriceSeries whose first price equals base exactly
    """
    if base <= 0:
        raise DomainError(f"Normalisation base must be positive, got {base}.")
    scaled = p.prices * (base / p.values[0])
    scaled.iloc[0] = base
    return PriceSeries(scaled)


def prices_from_returns(r: ReturnSeries, s0: float, start=None) -> PriceSeries:
    """
    Rebuilds prices as s0 * exp(cumulative log-return).

    Args:
        r: Log-return series
        s0: Positive first price
        start: Index label of the first price; defaults to one step before
            the first return (dates) or 0 (step index)
    """
    if s0 <= 0:
        raise DomainError(f"Starting price must be positive, got {s0}.")
    levels = s0 * np.exp(np.concatenate([[0.0], np.cumsum(r.to_numpy())]))
    index = r.values.index
    if isinstance(index, pd.DatetimeIndex):
        first = start if start is not None else index[0] - pd.tseries.offsets.BDay(1)
        full_index = pd.DatetimeIndex([first]).append(index)
    else:
        full_index = pd.RangeIndex(len(levels))
    return PriceSeries(pd.Series(levels, index=full_index))
