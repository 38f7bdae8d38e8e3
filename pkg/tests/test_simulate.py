import numpy as np
import pandas as pd
import pytest
from scipy import stats as sps

from distributions import t_scale_for_variance
from errors import DomainError
from market_data import PriceSeries
from pde import AdvectionDiffusionParams
from simulate import (
    PathSet, path_summary, paths_for_report, simulate_gaussian, simulate_t_proxy,
    synthetic_price_series,
)


def test_gaussian_paths_start_at_s0_and_stay_positive():
    paths = simulate_gaussian(AdvectionDiffusionParams(5e-4, 2e-4), n_steps=50, n_paths=20, s0=100.0, seed=1)

    assert paths.paths.shape == (51, 20)
    assert list(paths.paths.columns[:2]) == ['path_0', 'path_1']
    assert (paths.paths.iloc[0] == 100.0).all()
    assert (paths.paths.to_numpy() > 0).all()


def test_vanishing_diffusion_gives_deterministic_drift():
    D = 5e-4
    paths = simulate_gaussian(AdvectionDiffusionParams(D, 1e-30), n_steps=100, n_paths=3, seed=2)
    expected = 100.0 * np.exp(D * np.arange(101))
    for column in paths.paths.columns:
        assert paths.paths[column].to_numpy() == pytest.approx(expected, rel=1e-6)


def test_gaussian_terminal_log_returns():
    D, V, T = 5e-4, 2e-4, 250
    paths = simulate_gaussian(AdvectionDiffusionParams(D, V), n_steps=T, n_paths=10_000, seed=5)
    log_terminal = np.log(paths.terminal() / 100.0)

    standard_error = np.sqrt(2 * V * T / log_terminal.size)
    assert abs(log_terminal.mean() - D * T) < 3 * standard_error
    assert log_terminal.var() == pytest.approx(2 * V * T, rel=0.05)
    assert abs(sps.skew(log_terminal)) < 0.1
    assert abs(sps.kurtosis(log_terminal)) < 0.2


def test_same_seed_same_paths():
    params = AdvectionDiffusionParams(1e-4, 1e-4)
    a = simulate_gaussian(params, n_steps=30, n_paths=7, seed=42)
    b = simulate_gaussian(params, n_steps=30, n_paths=7, seed=42)
    pd.testing.assert_frame_equal(a.paths, b.paths)


def test_paths_do_not_depend_on_worker_count():
    params = AdvectionDiffusionParams(1e-4, 1e-4)
    serial = simulate_gaussian(params, n_steps=5, n_paths=5000, seed=3, n_jobs=1)
    parallel = simulate_gaussian(params, n_steps=5, n_paths=5000, seed=3, n_jobs=2)
    pd.testing.assert_frame_equal(serial.paths, parallel.paths)


def test_path_depends_only_on_seed_and_index():
    params = AdvectionDiffusionParams(1e-4, 1e-4)
    few = simulate_gaussian(params, n_steps=10, n_paths=3, seed=11)
    many = simulate_gaussian(params, n_steps=10, n_paths=8, seed=11)
    pd.testing.assert_frame_equal(few.paths, many.paths.iloc[:, :3])


def test_t_proxy_rejects_infinite_variance():
    with pytest.raises(DomainError):
        simulate_t_proxy(df=2.0, scale=0.01, drift=0.0, n_steps=10, n_paths=1)


def test_t_proxy_with_huge_df_is_gaussian():
    V, T = 2e-4, 100
    scale = t_scale_for_variance(1e6, 2 * V)
    paths = simulate_t_proxy(1e6, scale, 5e-4, n_steps=T, n_paths=10_000, seed=6)
    log_terminal = np.log(paths.terminal() / 100.0)

    statistic = sps.kstest(log_terminal, 'norm', args=(5e-4 * T, np.sqrt(2 * V * T))).statistic
    assert statistic < 0.02


@pytest.mark.slow
def test_t_proxy_pooled_increment_moments():
    scale = t_scale_for_variance(10.0, 4e-4)
    paths = simulate_t_proxy(10.0, scale, 0.0, n_steps=250, n_paths=4000, seed=12)
    increments = np.diff(np.log(paths.paths.to_numpy()), axis=0).ravel()

    assert increments.size == 1_000_000
    assert increments.var() == pytest.approx(4e-4, rel=0.02)
    assert sps.kurtosis(increments) == pytest.approx(1.0, abs=0.3)


def test_paths_for_report_matches_real_length():
    dates = pd.bdate_range('2019-01-01', periods=1001)
    real = PriceSeries(pd.Series(np.linspace(20.0, 30.0, 1001), index=dates))
    pathset, normalized = paths_for_report(real, AdvectionDiffusionParams(1e-4, 1e-4), seed=3)

    assert pathset.n_paths == 5
    assert pathset.n_steps == 1000
    assert (pathset.paths.iloc[0] == 100.0).all()
    assert normalized.values[0] == 100.0
    assert normalized.values[-1] == pytest.approx(150.0)


def test_path_summary_columns():
    pathset = simulate_gaussian(AdvectionDiffusionParams(0.0, 1e-4), n_steps=20, n_paths=4, seed=1)
    summary = path_summary(pathset)

    assert list(summary.columns) == ['terminal', 'maximum', 'minimum', 'log_return']
    assert len(summary) == 4
    assert (summary['maximum'] >= summary['terminal']).all()
    assert (summary['minimum'] <= 100.0).all()


def test_path_set_validation():
    frame = pd.DataFrame({'path_0': [100.0, 101.0]})
    with pytest.raises(DomainError):
        PathSet('gaussian', 99.0, 1, frame, 0)
    with pytest.raises(DomainError):
        PathSet('brownian', 100.0, 1, frame, 0)


def test_synthetic_price_series_is_dated_and_reproducible():
    a = synthetic_price_series(n_days=60, seed=2)
    b = synthetic_price_series(n_days=60, seed=2)

    assert len(a) == 60
    assert a.values[0] == 100.0
    assert a.dates[0] == pd.Timestamp('2020-01-02')
    assert all(d.dayofweek < 5 for d in a.dates)
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize('drift', [-1000.0, 500.0])
def test_log_prices_outside_float_range_are_rejected(drift):
    with pytest.raises(DomainError, match='float range'):
        simulate_gaussian(AdvectionDiffusionParams(drift, 1e-4), n_steps=2, n_paths=3)


def test_tiny_but_representable_prices_are_kept():
    paths = simulate_gaussian(AdvectionDiffusionParams(-300.0, 1e-4), n_steps=2, n_paths=3)
    assert (paths.paths.to_numpy() > 0).all()
