import io

import numpy as np
import pandas as pd
import pytest

from errors import DataIOError, DomainError, InsufficientDataError, ParseError
from market_data import (
    CsvSchema, PriceSeries, ReturnSeries, load_price_csv, load_returns_csv, log_returns,
    normalize_prices, prices_from_returns, simple_returns,
)


def _prices(values, start='2021-03-01'):
    return PriceSeries(pd.Series(values, index=pd.bdate_range(start, periods=len(values))))


def test_load_price_csv_reads_valid_rows():
    text = "date,close\n2020-01-02,100\n2020-01-03,101.5\n2020-01-06,99\n"
    prices, dropped = load_price_csv(io.StringIO(text))

    assert dropped == 0
    assert len(prices) == 3
    assert prices.values.tolist() == [100.0, 101.5, 99.0]
    assert prices.dates[0] == pd.Timestamp('2020-01-02')


def test_load_price_csv_drops_and_counts_bad_rows():
    text = (
        "date,close\n"
        "2020-01-02,100\n"
        "2020-01-03,\n"
        "2020-01-06,0\n"
        "2020-01-07,-5\n"
        ",101\n"
        "2020-01-08,102\n"
    )
    prices, dropped = load_price_csv(io.StringIO(text))

    assert dropped == 4
    assert prices.values.tolist() == [100.0, 102.0]


def test_load_price_csv_sorts_and_keeps_last_duplicate():
    text = "date,close\n2020-01-06,103\n2020-01-02,100\n2020-01-03,101\n2020-01-03,101.25\n"
    prices, _ = load_price_csv(io.StringIO(text))

    assert list(prices.dates) == list(pd.to_datetime(['2020-01-02', '2020-01-03', '2020-01-06']))
    assert prices.values.tolist() == [100.0, 101.25, 103.0]


def test_load_price_csv_custom_columns():
    text = "Day,Adj Close\n2020-01-02,10\n2020-01-03,11\n"
    prices, _ = load_price_csv(io.StringIO(text), CsvSchema('Day', 'Adj Close'))
    assert prices.values.tolist() == [10.0, 11.0]


def test_load_price_csv_missing_column_is_parse_error():
    with pytest.raises(ParseError, match='close'):
        load_price_csv(io.StringIO("date,open\n2020-01-02,1\n2020-01-03,2\n"))


def test_load_price_csv_bad_date_is_parse_error():
    with pytest.raises(ParseError, match='not-a-date'):
        load_price_csv(io.StringIO("date,close\n2020-01-02,1\nnot-a-date,2\n"))


def test_load_price_csv_header_only_is_insufficient():
    with pytest.raises(InsufficientDataError):
        load_price_csv(io.StringIO("date,close\n"))


def test_load_price_csv_single_row_is_insufficient():
    with pytest.raises(InsufficientDataError):
        load_price_csv(io.StringIO("date,close\n2020-01-02,100\n"))


def test_load_price_csv_missing_file_names_path(tmp_path):
    missing = tmp_path / 'nope.csv'
    with pytest.raises(DataIOError, match='nope.csv'):
        load_price_csv(missing)


def test_price_series_rejects_non_positive():
    with pytest.raises(DomainError):
        _prices([100.0, 0.0, 101.0])


def test_price_series_rejects_unsorted_dates():
    series = pd.Series([1.0, 2.0], index=pd.to_datetime(['2020-01-03', '2020-01-02']))
    with pytest.raises(DomainError):
        PriceSeries(series)


def test_log_returns_values_and_dates():
    p = _prices([100.0, 110.0, 99.0])
    r = log_returns(p)

    assert len(r) == 2
    assert r.to_numpy() == pytest.approx([np.log(1.1), np.log(0.9)], rel=1e-15)
    assert list(r.values.index) == list(p.dates[1:])


def test_log_returns_telescope_to_total_change():
    p = _prices([50.0, 51.0, 49.5, 60.0, 58.25])
    assert log_returns(p).to_numpy().sum() == pytest.approx(np.log(58.25 / 50.0), rel=1e-12)


def test_log_returns_are_scale_invariant():
    values = np.array([100.0, 101.0, 97.5, 103.2])
    a = log_returns(_prices(values)).to_numpy()
    b = log_returns(_prices(values * 37.0)).to_numpy()
    assert np.max(np.abs(a - b)) < 1e-14


def test_log_returns_need_two_prices():
    with pytest.raises(InsufficientDataError):
        log_returns(_prices([100.0]))


def test_simple_returns_close_to_log_returns_for_small_moves():
    p = _prices([100.0, 100.1, 100.05, 100.2])
    gap = np.abs(simple_returns(p).to_numpy() - log_returns(p).to_numpy())
    assert gap.max() < 1e-5


def test_normalize_prices_starts_exactly_at_base():
    p = _prices([37.3, 38.0, 36.1])
    normalized = normalize_prices(p, 100.0)

    assert normalized.values[0] == 100.0
    assert normalized.values[2] == pytest.approx(100.0 * 36.1 / 37.3, rel=1e-14)


def test_normalize_prices_rejects_bad_base():
    with pytest.raises(DomainError):
        normalize_prices(_prices([1.0, 2.0]), 0.0)


def test_prices_from_returns_rebuilds_series():
    p = _prices([100.0, 102.0, 101.0, 105.0])
    rebuilt = prices_from_returns(log_returns(p), 100.0, start=p.dates[0])

    assert rebuilt.values == pytest.approx(p.values, rel=1e-13)
    assert list(rebuilt.dates) == list(p.dates)


def test_return_series_rejects_non_finite():
    with pytest.raises(DomainError):
        ReturnSeries.from_values([0.01, np.nan])


def test_load_returns_csv_reads_written_format():
    text = "date,value\n2020-01-03,0.01\n2020-01-06,-0.02\n"
    r = load_returns_csv(io.StringIO(text))

    assert r.to_numpy().tolist() == [0.01, -0.02]
    assert isinstance(r.values.index, pd.DatetimeIndex)


def test_load_returns_csv_rejects_non_numeric():
    with pytest.raises(ParseError):
        load_returns_csv(io.StringIO("step,value\n0,abc\n"))
