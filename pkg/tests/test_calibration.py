import numpy as np
import pytest

from calibration import (
    CalibrationConfig, MomentTargets, calibrate_normal, calibrate_retention, retention_objective,
    theoretical_moments,
)
from errors import DegenerateSampleError, DomainError, NotLeptokurticError
from pde import RetentionParams


def test_calibrate_normal_constant_returns_are_degenerate():
    with pytest.raises(DegenerateSampleError):
        calibrate_normal([0.001] * 20)


def test_calibrate_normal_alternating_returns():
    params = calibrate_normal([0.01, -0.01, 0.01, -0.01])
    assert params.D == pytest.approx(0.0, abs=1e-18)
    assert params.V == pytest.approx(5e-5, rel=1e-12)


def test_calibrate_normal_recovers_simulated_parameters():
    x = np.random.default_rng(3).normal(5e-4, np.sqrt(4e-4), 100_000)
    params = calibrate_normal(x)

    standard_error = np.sqrt(4e-4 / x.size)
    assert abs(params.D - 5e-4) < 4 * standard_error
    assert params.V == pytest.approx(2e-4, rel=0.02)


def test_calibrate_normal_equals_sample_formulas(rng):
    x = rng.standard_t(5, size=1000) * 0.01
    params = calibrate_normal(x)
    assert params.D == pytest.approx(x.mean(), rel=1e-12)
    assert params.V == pytest.approx(x.var() / 2.0, rel=1e-12)


def test_moment_targets_validation():
    with pytest.raises(DomainError):
        MomentTargets(0.0, 1.0)


def test_objective_is_zero_for_exact_parameters():
    params = RetentionParams(0.3, 2e-4, 1e-7)
    targets = MomentTargets(*theoretical_moments(params))
    assert retention_objective(params, targets) == pytest.approx(0.0, abs=1e-24)


def test_objective_without_retention_misses_kurtosis():
    targets = MomentTargets(4e-4, 3.0)
    params = RetentionParams(0.0, 2e-4, 1e-7)
    assert retention_objective(params, targets) >= 1.0


def test_objective_quadruples_when_errors_double():
    params = RetentionParams(0.4, 1e-4, 5e-8)
    variance, excess = theoretical_moments(params)
    a, b = 0.01, -0.02
    near = MomentTargets(variance / (1 + a), excess / (1 + b))
    far = MomentTargets(variance / (1 + 2 * a), excess / (1 + 2 * b))

    assert retention_objective(params, near) == pytest.approx(a ** 2 + b ** 2, rel=1e-9)
    assert retention_objective(params, far) == pytest.approx(4 * retention_objective(params, near), rel=1e-9)


def test_round_trip_from_known_parameters():
    truth = RetentionParams(0.3, 2e-4, 1e-7)
    targets = MomentTargets(*theoretical_moments(truth))
    result = calibrate_retention(targets)

    assert result.converged
    assert result.objective_value < 1e-8
    variance, excess = theoretical_moments(result.params)
    assert variance == pytest.approx(targets.variance, rel=1e-8)
    assert excess == pytest.approx(targets.excess_kurtosis, rel=1e-8)
    assert 0.0 < result.params.k < 1.0


def test_underdetermined_targets_are_reproduced():
    result = calibrate_retention(MomentTargets(4e-4, 3.0))
    p = result.params

    assert abs(2 * (1 - p.k) * p.K2 - 4e-4) <= 1e-8
    assert abs(6 * p.k * p.K4 / ((1 - p.k) * p.K2 ** 2) - 3.0) <= 1e-6


def test_non_leptokurtic_targets_signal_fallback():
    with pytest.raises(NotLeptokurticError) as excinfo:
        calibrate_retention(MomentTargets(4e-4, -0.5))
    assert excinfo.value.excess_kurtosis == -0.5


def test_calibration_is_deterministic_and_worker_independent():
    targets = MomentTargets(3e-4, 1.5)
    serial = calibrate_retention(targets, CalibrationConfig(seed=8, n_jobs=1))
    parallel = calibrate_retention(targets, CalibrationConfig(seed=8, n_jobs=2))

    assert serial.params == parallel.params
    assert serial.start_index == parallel.start_index
    assert len(serial.start_objectives) == CalibrationConfig().n_starts


def test_full_search_reproduces_moments():
    targets = MomentTargets(2.5e-4, 2.0)
    result = calibrate_retention(targets, CalibrationConfig(pin_k2=False, n_starts=4))

    assert result.mode == 'full'
    assert result.objective_value < 1e-6


def test_result_serialises():
    result = calibrate_retention(MomentTargets(4e-4, 1.0), CalibrationConfig(n_starts=2))
    data = result.to_dict()
    assert set(data) == {'params', 'objective', 'iterations', 'converged', 'start_index', 'mode'}
    assert set(data['params']) == {'k', 'K2', 'K4'}
