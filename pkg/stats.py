"""
Sample moments, quantiles and histograms of return data.

These are the empirical targets the models are calibrated against. Variance
and kurtosis use plain moment ratios with divisor n (maximum likelihood),
without small-sample corrections.
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config import DIAGNOSTICS_CONFIG
from errors import DegenerateSampleError, DomainError, InsufficientDataError

KURTOSIS_FLOOR = -2.0


@dataclass(frozen=True)
class MomentSummary:
    """
    Mean, variance and excess kurtosis of a sample or a distribution.

    `excess_kurtosis` is None when the variance is zero. `signed` marks
    moments of a signed density (a grid slice with negative lobes), which are
    not held to the -2 kurtosis bound of probability distributions.
    """

    mean: float
    variance: float
    excess_kurtosis: float | None
    count: int
    signed: bool = False

    def __post_init__(self):
        if self.variance < 0:
            raise DomainError(f"Variance must be non-negative, got {self.variance}.")
        if (not self.signed and self.excess_kurtosis is not None
                and self.excess_kurtosis < KURTOSIS_FLOOR - 1e-9):
            raise DomainError(f"Excess kurtosis {self.excess_kurtosis} is below the bound -2.")
        if self.count < 1:
            raise DomainError("A moment summary needs a positive count.")

    @property
    def degenerate(self) -> bool:
        return self.excess_kurtosis is None

    def require_excess_kurtosis(self) -> float:
        """Returns the excess kurtosis or raises for a zero-variance sample."""
        if self.excess_kurtosis is None:
            raise DegenerateSampleError("Zero variance: excess kurtosis is undefined.")
        return self.excess_kurtosis

    def to_dict(self) -> dict:
        return {
            'mean': self.mean,
            'variance': self.variance,
            'excess_kurtosis': self.excess_kurtosis,
            'count': self.count,
        }


@dataclass(frozen=True, eq=False)
class Histogram:
    """Equal-width histogram normalised to a density."""

    bin_edges: np.ndarray
    counts: np.ndarray
    densities: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'bin_left': self.bin_edges[:-1],
            'bin_right': self.bin_edges[1:],
            'count': self.counts,
            'density': self.densities,
        })


def as_array(data) -> np.ndarray:
    """Returns the float values of a ReturnSeries, Series or array-like."""
    if hasattr(data, 'to_numpy'):
        data = data.to_numpy()
    return np.asarray(data, dtype=float).ravel()


def raw_moments(values, orders, weights=None) -> list:
    """
    Uncentered moments sum(w * x**n) for each order n.

    Without weights every value has weight 1/len(values).
    """
    x = as_array(values)
    w = np.full(x.size, 1.0 / x.size) if weights is None else as_array(weights)
    return [float(np.dot(w, x ** n)) for n in orders]


def moments_from_weights(positions, weights, count: int, signed: bool = False) -> MomentSummary:
    """
    Moment summary of a discrete distribution given by positions and weights.

    Weights are normalised by their sum before use. With `signed=True` some
    weights may be negative, as on a density grid with negative lobes.
    """
    x = as_array(positions)
    w = as_array(weights)
    if not signed and np.any(w < 0):
        raise DomainError("Negative weights need signed=True.")
    w = w / w.sum()
    mean = raw_moments(x, [1], w)[0]
    dev = x - mean
    variance = raw_moments(dev, [2], w)[0]
    scale = float(np.max(np.abs(x))) if x.size else 0.0
    if variance <= (1e-14 * scale) ** 2 or variance == 0.0:
        return MomentSummary(mean, 0.0, None, count, signed)
    fourth = raw_moments(dev, [4], w)[0]
    return MomentSummary(mean, variance, fourth / variance ** 2 - 3.0, count, signed)


def sample_moments(r) -> MomentSummary:
    """
    Computes the MLE mean, variance and excess kurtosis of a sample.

    Args:
        r: ReturnSeries or array-like with at least 4 values

    Returns:
        MomentSummary; excess_kurtosis is None for a constant sample
    """
    x = as_array(r)
    if x.size < 4:
        raise InsufficientDataError(f"Sample moments need at least 4 values, got {x.size}.")
    return moments_from_weights(x, np.ones(x.size), int(x.size))


def empirical_quantiles(r, probs) -> list:
    """
    Sample quantiles by linear interpolation between order statistics.

    The quantile at p sits at rank p*(n-1)+1 of the sorted sample.
    """
    probs = np.asarray(list(probs), dtype=float)
    if probs.size == 0:
        return []
    if np.any((probs <= 0) | (probs >= 1)):
        raise DomainError("Quantile probabilities must lie strictly between 0 and 1.")
    x = as_array(r)
    if x.size == 0:
        raise InsufficientDataError("Quantiles need at least one value.")
    return [float(q) for q in np.quantile(x, probs, method='linear')]


def histogram(r, bins: int | str = 'auto') -> Histogram:
    """
    Equal-width histogram over [min, max] normalised to unit area.

    Args:
        r: ReturnSeries or array-like with at least 2 values
        bins: Number of bins, or 'auto' for Freedman-Diaconis with a floor
            of 10 bins

    Returns:
        Histogram whose densities integrate to 1
    """
    x = as_array(r)
    n = x.size
    if n < 2:
        raise InsufficientDataError(f"A histogram needs at least 2 values, got {n}.")

    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        # Single bin centred on the common value
        width = max(abs(lo) * 1e-9, 1e-12)
        edges = np.array([lo - width / 2, lo + width / 2])
        counts = np.array([n])
        return Histogram(edges, counts, counts / (n * width))

    if bins == 'auto':
        fd_edges = np.histogram_bin_edges(x, bins='fd')
        n_bins = max(DIAGNOSTICS_CONFIG['min_auto_bins'], len(fd_edges) - 1)
    else:
        n_bins = int(bins)
        if n_bins < 1:
            raise DomainError(f"Bin count must be positive, got {bins}.")

    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    densities = counts / (n * np.diff(edges))
    return Histogram(edges, counts, densities)
