"""
Daily price paths under the fitted Gaussian and t-proxy models.

Log-prices move by i.i.d. increments and are exponentiated, so every price is
positive and every path starts exactly at s0. One step is one trading day.
Paths whose log-price leaves the double-precision range are rejected with
DomainError rather than rounded to 0 or inf.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import pandas as pd

from config import (
    DEFAULT_SEED, FIXTURE_CONFIG, NORMALIZED_START, SIMULATION_CONFIG, STREAM_TAGS, TIME_STEP_DAYS,
)
from distributions import StudentTSpec, t_scale_for_variance
from errors import DomainError
from market_data import PriceSeries, normalize_prices
from pde import AdvectionDiffusionParams
from utils import path_blocks, run_blocks, stream_rng

logger = logging.getLogger(__name__)

MODEL_GAUSSIAN = 'gaussian'
MODEL_T_PROXY = 't_proxy'
MODELS = (MODEL_GAUSSIAN, MODEL_T_PROXY)

# Log-prices outside this range overflow or underflow exp
LOG_PRICE_MIN = float(np.log(np.finfo(float).tiny))
LOG_PRICE_MAX = float(np.log(np.finfo(float).max))


@dataclass(frozen=True, eq=False)
class PathSet:
    """
    Simulated prices, one column per path (`path_0`, ...) indexed by step.
    """

    model: str
    s0: float
    n_steps: int
    paths: pd.DataFrame
    seed: int

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"Unknown model {self.model!r}; expected one of {MODELS}.")
        if self.paths.shape[0] != self.n_steps + 1:
            raise DomainError("Each path needs n_steps + 1 prices.")
        if not (self.paths.iloc[0] == self.s0).all():
            raise DomainError("Every path must start at s0.")
        if not (self.paths.to_numpy() > 0).all():
            raise DomainError("Simulated prices must be positive.")

    @property
    def n_paths(self) -> int:
        return self.paths.shape[1]

    def terminal(self) -> np.ndarray:
        return self.paths.iloc[-1].to_numpy()

    def to_dict(self) -> dict:
        return {
            'model': self.model,
            's0': self.s0,
            'n_steps': self.n_steps,
            'seed': self.seed,
            'paths': {col: self.paths[col].tolist() for col in self.paths.columns},
        }


def _simulate(model: str, draw: Callable, n_steps: int, n_paths: int, s0: float,
              seed: int, n_jobs: int | None) -> PathSet:
    """
    Shared path builder.

    `draw(rng, shape)` returns log-increments; block b of paths uses the
    generator keyed by (seed, model tag, b).
    """
    if n_steps < 1 or n_paths < 1:
        raise DomainError(f"Need n_steps >= 1 and n_paths >= 1, got {n_steps}, {n_paths}.")
    if not s0 > 0:
        raise DomainError(f"Starting price must be positive, got {s0}.")

    def block(block_index, start, stop):
        rng = stream_rng(seed, STREAM_TAGS[model], block_index)
        increments = draw(rng, (stop - start, n_steps))
        log_prices = np.log(s0) + np.cumsum(increments, axis=1)
        low, high = log_prices.min(), log_prices.max()
        if not (LOG_PRICE_MIN < low and high < LOG_PRICE_MAX):
            raise DomainError(
                f"Log-prices reach [{low:.4g}, {high:.4g}], outside the "
                f"float range ({LOG_PRICE_MIN:.1f}, {LOG_PRICE_MAX:.1f}); shorten the horizon "
                "or reduce the drift and scale."
            )
        prices = np.empty((stop - start, n_steps + 1))
        prices[:, 0] = s0
        prices[:, 1:] = np.exp(log_prices)
        return prices

    prices = np.vstack(run_blocks(block, path_blocks(n_paths), n_jobs))
    frame = pd.DataFrame(
        prices.T,
        index=pd.RangeIndex(n_steps + 1, name='step'),
        columns=[f'path_{i}' for i in range(n_paths)],
    )
    logger.info("Simulated %d %s paths of %d steps (seed %d)", n_paths, model, n_steps, seed)
    return PathSet(model, float(s0), n_steps, frame, seed)


def simulate_gaussian(params: AdvectionDiffusionParams, n_steps: int = SIMULATION_CONFIG['n_steps'],
                      n_paths: int = SIMULATION_CONFIG['n_paths'], s0: float = SIMULATION_CONFIG['s0'],
                      seed: int = DEFAULT_SEED, n_jobs: int | None = None) -> PathSet:
    """
    Paths whose log-increments are N(D dt, 2 V dt) with dt = 1 day.
    """
    dt = TIME_STEP_DAYS
    loc = params.D * dt
    scale = float(np.sqrt(2.0 * params.V * dt))

    def draw(rng, shape):
        return rng.normal(loc, scale, size=shape)

    return _simulate(MODEL_GAUSSIAN, draw, n_steps, n_paths, s0, seed, n_jobs)


def simulate_t_proxy(df: float, scale: float, drift: float,
                     n_steps: int = SIMULATION_CONFIG['n_steps'],
                     n_paths: int = SIMULATION_CONFIG['n_paths'], s0: float = SIMULATION_CONFIG['s0'],
                     seed: int = DEFAULT_SEED, n_jobs: int | None = None) -> PathSet:
    """
    Paths whose log-increments are drift * dt plus a t(df) draw times scale.

    Args:
        df: Degrees of freedom, > 2 so that the variance exists
        scale: Scale of the t draws
        drift: Drift per day; 0 gives driftless paths

    Raises:
        DomainError: df <= 2 or scale <= 0
    """
    if df <= 2:
        raise DomainError(f"The t proxy needs df > 2 for a finite variance, got {df}.")
    if not scale > 0:
        raise DomainError(f"Scale must be positive, got {scale}.")
    dt = TIME_STEP_DAYS

    def draw(rng, shape):
        return drift * dt + scale * rng.standard_t(df, size=shape)

    return _simulate(MODEL_T_PROXY, draw, n_steps, n_paths, s0, seed, n_jobs)


def paths_for_report(real: PriceSeries, params: AdvectionDiffusionParams | StudentTSpec,
                     n_paths: int = SIMULATION_CONFIG['n_paths'], seed: int = DEFAULT_SEED,
                     drift: float | None = None, n_jobs: int | None = None) -> tuple:
    """
    Simulates paths as long as a real series, both starting at 100.

    Args:
        real: Observed prices
        params: Gaussian parameters, or the fitted t proxy
        n_paths: Number of paths
        seed: Seed
        drift: Drift of the t proxy; defaults to its location

    Returns:
        Tuple of (PathSet, normalised real PriceSeries)
    """
    n_steps = len(real) - 1
    if isinstance(params, AdvectionDiffusionParams):
        paths = simulate_gaussian(params, n_steps, n_paths, NORMALIZED_START, seed, n_jobs)
    elif isinstance(params, StudentTSpec):
        paths = simulate_t_proxy(params.df, params.scale, params.loc if drift is None else drift,
                                 n_steps, n_paths, NORMALIZED_START, seed, n_jobs)
    else:
        raise DomainError(f"Cannot simulate from {type(params).__name__}.")
    return paths, normalize_prices(real, NORMALIZED_START)


def path_summary(pathset: PathSet) -> pd.DataFrame:
    """Terminal, highest and lowest price and total log-return of each path."""
    prices = pathset.paths
    return pd.DataFrame({
        'terminal': prices.iloc[-1],
        'maximum': prices.max(),
        'minimum': prices.min(),
        'log_return': np.log(prices.iloc[-1] / pathset.s0),
    }).rename_axis('path')


def synthetic_price_series(n_days: int = FIXTURE_CONFIG['n_days'], df: float = FIXTURE_CONFIG['df'],
                           daily_variance: float = FIXTURE_CONFIG['daily_variance'],
                           drift: float = FIXTURE_CONFIG['drift'], seed: int = FIXTURE_CONFIG['seed'],
                           start_date: str = FIXTURE_CONFIG['start_date'],
                           s0: float = NORMALIZED_START) -> PriceSeries:
    """
    A dated price series drawn from the t-proxy model.

    Serves as the stand-in for market data in end-to-end runs: business days
    from start_date, t increments with the given variance and drift.
    """
    if n_days < 2:
        raise DomainError(f"A price series needs at least 2 days, got {n_days}.")
    scale = t_scale_for_variance(df, daily_variance)
    pathset = simulate_t_proxy(df, scale, drift, n_days - 1, 1, s0, seed)
    dates = pd.bdate_range(start=start_date, periods=n_days, name='date')
    return PriceSeries(pd.Series(pathset.paths['path_0'].to_numpy(), index=dates))
