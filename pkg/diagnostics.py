"""
Fit comparison of the Gaussian and retention models on a return sample.

Produces the tables behind the density-overlay and Q-Q figures, a moment
table per model and a log-density score that ranks the fits.
"""
import json
import logging
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from calibration import (
    CalibrationConfig, MomentTargets, calibrate_normal, calibrate_retention, theoretical_moments,
)
from config import APP_VERSION, DEFAULT_SEED, DIAGNOSTICS_CONFIG
from distributions import (
    NormalSpec, StudentTSpec, log_density_score, pdf, quantile, t_proxy_from_moments,
)
from errors import InsufficientDataError, ModelFallbackWarning, NotLeptokurticError
from market_data import PriceSeries, simple_returns
from stats import Histogram, as_array, histogram, sample_moments

logger = logging.getLogger(__name__)

REPORT_KEYS = ('empirical', 'normal_fit', 'retention_fit', 'overlay', 'qq_normal', 'qq_t',
               'scores', 'moment_table', 'meta')
FRAME_KEYS = ('overlay', 'qq_normal', 'qq_t', 'moment_table')


@dataclass(frozen=True)
class ReportConfig:
    seed: int = DEFAULT_SEED
    bins: int | str = 'auto'
    include_timestamp: bool = True
    calibration: CalibrationConfig | None = None


@dataclass(eq=False)
class FitReport:
    """Everything the report command writes, in JSON-ready pieces."""

    empirical: dict
    normal_fit: dict
    retention_fit: dict
    overlay: pd.DataFrame
    qq_normal: pd.DataFrame
    qq_t: pd.DataFrame | None
    scores: dict
    moment_table: pd.DataFrame
    meta: dict = field(default_factory=dict)

    @property
    def retention_applicable(self) -> bool:
        return bool(self.retention_fit.get('applicable'))

    def to_dict(self) -> dict:
        data = {}
        for key in REPORT_KEYS:
            value = getattr(self, key)
            if key in FRAME_KEYS:
                value = None if value is None else {col: value[col].tolist() for col in value.columns}
            data[key] = value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'FitReport':
        kwargs = {}
        for key in REPORT_KEYS:
            value = data.get(key)
            if key in FRAME_KEYS and value is not None:
                value = pd.DataFrame(value)
            kwargs[key] = value
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def qq_data(sample, dist: NormalSpec | StudentTSpec) -> pd.DataFrame:
    """
    Q-Q pairs of a sample against a fitted distribution.

    The i-th order statistic (i = 1..n) is paired with the quantile at the
    plotting position (i - 0.5) / n.

    Returns:
        DataFrame with probability, theoretical and empirical columns
    """
    x = np.sort(as_array(sample))
    n = x.size
    if n < DIAGNOSTICS_CONFIG['min_qq_size']:
        raise InsufficientDataError(
            f"Q-Q data need at least {DIAGNOSTICS_CONFIG['min_qq_size']} values, got {n}."
        )
    probs = (np.arange(1, n + 1) - DIAGNOSTICS_CONFIG['plotting_offset']) / n
    return pd.DataFrame({
        'probability': probs,
        'theoretical': np.asarray(quantile(probs, dist), dtype=float),
        'empirical': x,
    })


def density_overlay(h: Histogram, dists: Mapping | Sequence = ()) -> pd.DataFrame:
    """
    Histogram densities next to each distribution's pdf at the bin centres.

    Args:
        h: Histogram of the sample
        dists: Mapping of column name to spec, or a list of specs named by family

    Returns:
        DataFrame with one row per bin
    """
    if not isinstance(dists, Mapping):
        dists = {spec.to_dict()['family']: spec for spec in dists}
    table = pd.DataFrame({'bin_center': h.centers, 'empirical': h.densities})
    for name, spec in dists.items():
        table[name] = np.asarray(pdf(h.centers, spec), dtype=float)
    return table


def _moment_row(model: str, variance: float, excess: float, empirical) -> dict:
    return {
        'model': model,
        'variance': variance,
        'excess_kurtosis': excess,
        'variance_error': abs(variance - empirical.variance),
        'kurtosis_error': abs(excess - empirical.excess_kurtosis),
    }


def build_fit_report(r, config: ReportConfig | None = None,
                     prices: PriceSeries | None = None) -> FitReport:
    """
    Fits both models to a return sample and assembles the comparison.

    Args:
        r: ReturnSeries with at least 30 values
        config: Seed, histogram bins, calibration settings and timestamp flag
        prices: The prices r came from; adds the simple/log return gap to meta

    Returns:
        FitReport; when the sample is not leptokurtic the retention section is
        marked not applicable and only the normal fit is reported
    """
    config = config or ReportConfig()
    values = as_array(r)
    if values.size < DIAGNOSTICS_CONFIG['min_report_size']:
        raise InsufficientDataError(
            f"A fit report needs at least {DIAGNOSTICS_CONFIG['min_report_size']} returns, "
            f"got {values.size}."
        )
    dt = getattr(r, 'dt', 1.0)

    # 1. Empirical moments and the closed-form Gaussian fit
    empirical = sample_moments(values)
    normal = calibrate_normal(values)
    normal_spec = NormalSpec.from_params(normal, dt)
    logger.info("Normal fit: D=%.6g V=%.6g", normal.D, normal.V)

    # 2. Retention fit and its t proxy
    excess = empirical.require_excess_kurtosis()
    calibration_config = config.calibration or CalibrationConfig(seed=config.seed)
    t_spec = None
    try:
        result = calibrate_retention(MomentTargets.from_summary(empirical, dt), calibration_config)
    except NotLeptokurticError as e:
        message = f"{e} Reporting the normal model only."
        logger.warning(message)
        warnings.warn(message, ModelFallbackWarning, stacklevel=2)
        retention_fit = {'applicable': False, 'reason': str(e), 'excess_kurtosis': excess}
    else:
        t_spec = t_proxy_from_moments(empirical.mean, empirical.variance, excess)
        model_variance, model_excess = theoretical_moments(result.params, dt)
        retention_fit = {
            'applicable': True,
            **result.to_dict(),
            'theoretical': {'variance': model_variance, 'excess_kurtosis': model_excess},
            'proxy': t_spec.to_dict(),
        }

    # 3. Overlay and Q-Q tables
    specs = {'normal': normal_spec}
    if t_spec is not None:
        specs['t_proxy'] = t_spec
    overlay = density_overlay(histogram(values, config.bins), specs)
    qq_normal = qq_data(values, normal_spec)
    qq_t = qq_data(values, t_spec) if t_spec is not None else None

    # 4. Scores and moment table
    scores = {name: log_density_score(values, spec) for name, spec in specs.items()}
    rows = [
        _moment_row('empirical', empirical.variance, excess, empirical),
        _moment_row('normal', normal_spec.sigma2, 0.0, empirical),
    ]
    if t_spec is not None:
        rows.append(_moment_row('retention', *theoretical_moments(result.params, dt), empirical))
        rows.append(_moment_row('t_proxy', t_spec.variance, t_spec.excess_kurtosis, empirical))
    moment_table = pd.DataFrame(rows)

    meta = {'version': APP_VERSION, 'seed': config.seed, 'count': int(values.size), 'dt': dt}
    index = getattr(getattr(r, 'values', None), 'index', None)
    if isinstance(index, pd.DatetimeIndex):
        meta['start'] = index[0].strftime('%Y-%m-%d')
        meta['end'] = index[-1].strftime('%Y-%m-%d')
    if prices is not None:
        gap = np.abs(simple_returns(prices).to_numpy() - values)
        meta['max_simple_log_gap'] = float(gap.max())
    if config.include_timestamp:
        meta['timestamp'] = datetime.now(timezone.utc).isoformat(timespec='seconds')

    return FitReport(
        empirical=empirical.to_dict(),
        normal_fit={'params': normal.to_dict(), 'spec': normal_spec.to_dict()},
        retention_fit=retention_fit,
        overlay=overlay,
        qq_normal=qq_normal,
        qq_t=qq_t,
        scores=scores,
        moment_table=moment_table,
        meta=meta,
    )
