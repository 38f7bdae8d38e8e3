import numpy as np
import pytest

from errors import DegenerateSampleError, DomainError, InsufficientDataError
from stats import empirical_quantiles, histogram, moments_from_weights, raw_moments, sample_moments


def test_sample_moments_small_sample():
    m = sample_moments([1.0, 2.0, 3.0, 4.0])

    assert m.mean == pytest.approx(2.5)
    assert m.variance == pytest.approx(1.25)
    assert m.excess_kurtosis == pytest.approx(-1.36)
    assert m.count == 4


def test_sample_moments_constant_sample_is_degenerate():
    m = sample_moments([0.001] * 10)

    assert m.variance == 0.0
    assert m.degenerate
    with pytest.raises(DegenerateSampleError):
        m.require_excess_kurtosis()


def test_sample_moments_need_four_values():
    with pytest.raises(InsufficientDataError):
        sample_moments([1.0, 2.0, 3.0])


def test_gaussian_sample_has_near_zero_excess_kurtosis(rng):
    m = sample_moments(rng.normal(0.0, 2.0, 100_000))

    assert m.variance == pytest.approx(4.0, rel=0.02)
    assert abs(m.excess_kurtosis) < 0.1


def test_excess_kurtosis_is_never_below_minus_two(rng):
    two_point = rng.choice([-1.0, 1.0], size=1000)
    assert sample_moments(two_point).excess_kurtosis >= -2.0 - 1e-12


def test_moments_from_weights_matches_sample_moments(rng):
    x = rng.standard_t(8, size=500)
    direct = sample_moments(x)
    weighted = moments_from_weights(x, np.full(x.size, 3.0), x.size)

    assert weighted.mean == pytest.approx(direct.mean, abs=1e-14)
    assert weighted.variance == pytest.approx(direct.variance, rel=1e-12)
    assert weighted.excess_kurtosis == pytest.approx(direct.excess_kurtosis, rel=1e-10)


def test_raw_moments():
    assert raw_moments([1.0, 2.0, 3.0], [0, 1, 2]) == pytest.approx([1.0, 2.0, 14.0 / 3.0])


def test_empirical_quantiles_linear_interpolation():
    data = [5.0, 1.0, 4.0, 2.0, 3.0]
    assert empirical_quantiles(data, [0.5]) == [3.0]
    assert empirical_quantiles(data, [0.25, 0.75]) == [2.0, 4.0]
    assert empirical_quantiles(data, [0.1]) == pytest.approx([1.4])


def test_empirical_quantiles_edge_cases():
    assert empirical_quantiles([1.0, 2.0], []) == []
    with pytest.raises(DomainError):
        empirical_quantiles([1.0, 2.0], [1.0])


def test_histogram_densities_integrate_to_one(rng):
    h = histogram(rng.normal(size=5000), bins=40)

    assert len(h.counts) == 40
    assert h.counts.sum() == 5000
    assert np.sum(h.densities * h.widths) == pytest.approx(1.0, rel=1e-12)


def test_histogram_auto_has_bin_floor():
    h = histogram(np.linspace(0.0, 1.0, 12), bins='auto')
    assert len(h.counts) >= 10
    assert np.sum(h.densities * h.widths) == pytest.approx(1.0, rel=1e-12)


def test_histogram_constant_sample_is_single_bin():
    h = histogram([0.5] * 7)

    assert len(h.counts) == 1
    assert h.counts[0] == 7
    assert h.centers[0] == pytest.approx(0.5)
    assert np.sum(h.densities * h.widths) == pytest.approx(1.0)


def test_histogram_needs_two_values():
    with pytest.raises(InsufficientDataError):
        histogram([1.0])


def test_histogram_to_frame_columns(rng):
    frame = histogram(rng.normal(size=100), bins=5).to_frame()
    assert list(frame.columns) == ['bin_left', 'bin_right', 'count', 'density']
    assert len(frame) == 5


def test_signed_weights_skip_the_kurtosis_bound():
    positions = [-2.0, -1.0, 0.0, 1.0, 2.0]
    weights = [-0.05, 0.3, 0.5, 0.3, -0.05]

    with pytest.raises(DomainError):
        moments_from_weights(positions, weights, 5)
    signed = moments_from_weights(positions, weights, 5, signed=True)
    assert signed.signed
    assert signed.variance == pytest.approx(0.2)
    assert signed.excess_kurtosis == pytest.approx(-1.0 / 0.04 - 3.0)


def test_weighted_moments_use_raw_moments():
    x = np.array([0.0, 1.0, 3.0])
    w = np.array([0.25, 0.5, 0.25])
    summary = moments_from_weights(x, w, 3)

    mean = raw_moments(x, [1], w)[0]
    assert summary.mean == mean
    assert summary.variance == raw_moments(x - mean, [2], w)[0]
