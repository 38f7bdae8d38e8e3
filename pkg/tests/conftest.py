"""
Shared fixtures.

The price fixture is produced by the package's own simulator at a pinned
seed, so no market data is needed.
"""
import numpy as np
import pytest

from config import FIXTURE_CONFIG
from market_data import ReturnSeries, log_returns
from simulate import synthetic_price_series
from writers import write_price_series


@pytest.fixture(scope='session')
def fixture_prices():
    return synthetic_price_series(seed=FIXTURE_CONFIG['seed'])


@pytest.fixture(scope='session')
def fixture_returns(fixture_prices):
    return log_returns(fixture_prices)


@pytest.fixture
def fixture_csv(tmp_path, fixture_prices):
    """The synthetic prices as a `date,close` file."""
    return write_price_series(fixture_prices, tmp_path / 'prices.csv', column='close')


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def returns_from(values) -> ReturnSeries:
    return ReturnSeries.from_values(values)
