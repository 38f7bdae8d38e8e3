"""
Normal and location-scale Student-t distributions.

The t distribution stands in for the solution of the fourth-order retention
equation: its degrees of freedom are chosen so that its excess kurtosis equals
the empirical one (df = 6 / excess_kurtosis + 4), and its scale so that its
variance equals the empirical one.
"""
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from config import STREAM_TAGS
from errors import DomainError
from utils import stream_rng


@dataclass(frozen=True)
class NormalSpec:
    """Normal distribution with mean mu and variance sigma2."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise DomainError(f"Normal variance must be positive, got {self.sigma2}.")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    @classmethod
    def from_params(cls, params, t: float = 1.0) -> 'NormalSpec':
        """Distribution of the advection-diffusion increment over time t: N(D t, 2 V t)."""
        return cls(params.D * t, 2.0 * params.V * t)

    def to_dict(self) -> dict:
        return {'family': 'normal', 'mu': self.mu, 'sigma2': self.sigma2}


@dataclass(frozen=True)
class StudentTSpec:
    """
    Location-scale Student-t distribution.

    Any df > 0 can be evaluated; the variance exists only for df > 2 and the
    excess kurtosis only for df > 4.
    """

    df: float
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.df > 0:
            raise DomainError(f"Degrees of freedom must be positive, got {self.df}.")
        if not self.scale > 0:
            raise DomainError(f"Scale must be positive, got {self.scale}.")

    @property
    def variance(self) -> float:
        if self.df <= 2:
            raise DomainError(f"Variance is undefined for df={self.df} <= 2.")
        return self.scale ** 2 * self.df / (self.df - 2)

    @property
    def excess_kurtosis(self) -> float:
        if self.df <= 4:
            raise DomainError(f"Excess kurtosis is undefined for df={self.df} <= 4.")
        return 6.0 / (self.df - 4)

    def to_dict(self) -> dict:
        return {'family': 'student_t', 'df': self.df, 'loc': self.loc, 'scale': self.scale}


def spec_from_dict(data: dict) -> NormalSpec | StudentTSpec:
    """Rebuilds a spec from its to_dict() form."""
    if data.get('family') == 'normal':
        return NormalSpec(data['mu'], data['sigma2'])
    if data.get('family') == 'student_t':
        return StudentTSpec(data['df'], data['loc'], data['scale'])
    raise DomainError(f"Unknown distribution family {data.get('family')!r}.")


def _check_probability(p):
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr <= 0) | (p_arr >= 1)):
        raise DomainError("Probabilities must lie strictly between 0 and 1.")
    return p_arr


def normal_pdf(x, spec: NormalSpec):
    """Density (2 pi sigma2)^(-1/2) exp(-(x - mu)^2 / (2 sigma2))."""
    return sps.norm.pdf(x, loc=spec.mu, scale=spec.sigma)


def normal_quantile(p, spec: NormalSpec):
    return sps.norm.ppf(_check_probability(p), loc=spec.mu, scale=spec.sigma)


def t_pdf(x, spec: StudentTSpec):
    """Location-scale t density, valid for real (non-integer) df."""
    return sps.t.pdf(x, spec.df, loc=spec.loc, scale=spec.scale)


def t_cdf(x, spec: StudentTSpec):
    return sps.t.cdf(x, spec.df, loc=spec.loc, scale=spec.scale)


def t_quantile(p, spec: StudentTSpec):
    """
    Inverse CDF of the location-scale t distribution.

    Raises:
        DomainError: p outside (0, 1)
    """
    result = sps.t.ppf(_check_probability(p), spec.df, loc=spec.loc, scale=spec.scale)
    return float(result) if np.ndim(result) == 0 else result


def pdf(x, spec: NormalSpec | StudentTSpec):
    """Density of either family."""
    if isinstance(spec, NormalSpec):
        return normal_pdf(x, spec)
    return t_pdf(x, spec)


def quantile(p, spec: NormalSpec | StudentTSpec):
    """Quantile function of either family."""
    if isinstance(spec, NormalSpec):
        return normal_quantile(p, spec)
    return t_quantile(p, spec)


def log_density_score(values, spec: NormalSpec | StudentTSpec) -> float:
    """Mean log-density of the values under a fitted distribution."""
    x = np.asarray(values, dtype=float)
    if isinstance(spec, NormalSpec):
        logpdf = sps.norm.logpdf(x, loc=spec.mu, scale=spec.sigma)
    else:
        logpdf = sps.t.logpdf(x, spec.df, loc=spec.loc, scale=spec.scale)
    return float(np.mean(logpdf))


def t_sample(spec: StudentTSpec, n: int, seed: int) -> np.ndarray:
    """
    Draws n i.i.d. values from a t distribution.

    Deterministic for a fixed seed.
    """
    if spec.df <= 2:
        raise DomainError(f"Sampling requires df > 2, got {spec.df}.")
    if n < 1:
        raise DomainError(f"Sample size must be at least 1, got {n}.")
    rng = stream_rng(seed, STREAM_TAGS['t_sample'])
    return spec.loc + spec.scale * rng.standard_t(spec.df, size=n)


def df_from_excess_kurtosis(k_e: float) -> float:
    """
    Degrees of freedom whose t distribution has excess kurtosis k_e.

    Raises:
        DomainError: k_e <= 0, where no t distribution applies
    """
    if not np.isfinite(k_e) or k_e <= 0:
        raise DomainError(
            f"Excess kurtosis must be positive to map to a t distribution, got {k_e}."
        )
    return 6.0 / k_e + 4.0


def t_scale_for_variance(df: float, target_variance: float) -> float:
    """Scale sqrt(target * (df - 2) / df) giving a t distribution the target variance."""
    if df <= 2:
        raise DomainError(f"Variance matching requires df > 2, got {df}.")
    if not target_variance > 0:
        raise DomainError(f"Target variance must be positive, got {target_variance}.")
    return float(np.sqrt(target_variance * (df - 2) / df))


def t_proxy_from_moments(mean: float, variance: float, excess_kurtosis: float) -> StudentTSpec:
    """
    The t distribution matching a sample's mean, variance and excess kurtosis.
    """
    df = df_from_excess_kurtosis(excess_kurtosis)
    return StudentTSpec(df, mean, t_scale_for_variance(df, variance))
