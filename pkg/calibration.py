"""
Parameter estimation for the two models.

The Gaussian model is fitted in closed form: D is the sample mean and V half
the MLE variance. The retention model is fitted by matching its variance and
excess kurtosis to the sample's. Two moments cannot pin down three
parameters, so by default K2 is solved from the variance equation and the
simplex search runs over (k, K4) only.
"""
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit
from scipy.stats import qmc

from config import CALIBRATION_CONFIG, DEFAULT_SEED, STREAM_TAGS, TIME_STEP_DAYS
from errors import AccuracyWarning, DegenerateSampleError, DomainError, NotLeptokurticError
from pde import AdvectionDiffusionParams, RetentionParams, retention_moments
from stats import MomentSummary, sample_moments
from utils import run_blocks, stream_rng

logger = logging.getLogger(__name__)

MODE_PINNED = 'pinned_k2'
MODE_FULL = 'full'


@dataclass(frozen=True)
class MomentTargets:
    """Empirical variance and excess kurtosis over a step of dt days."""

    variance: float
    excess_kurtosis: float
    dt: float = TIME_STEP_DAYS

    def __post_init__(self):
        if not self.variance > 0:
            raise DomainError(f"Target variance must be positive, got {self.variance}.")
        if not self.dt > 0:
            raise DomainError(f"Time step must be positive, got {self.dt}.")

    @classmethod
    def from_summary(cls, summary: MomentSummary, dt: float = TIME_STEP_DAYS) -> 'MomentTargets':
        return cls(summary.variance, summary.require_excess_kurtosis(), dt)


@dataclass(frozen=True)
class CalibrationConfig:
    """Optimizer settings for calibrate_retention."""

    max_iter: int = CALIBRATION_CONFIG['max_iter']
    tolerance: float = CALIBRATION_CONFIG['tolerance']
    n_starts: int = CALIBRATION_CONFIG['n_starts']
    seed: int = DEFAULT_SEED
    pin_k2: bool = CALIBRATION_CONFIG['pin_k2']
    n_jobs: int | None = None

    def __post_init__(self):
        if self.n_starts < 1 or self.max_iter < 1:
            raise DomainError("Need at least one start and one iteration.")


@dataclass(frozen=True)
class CalibrationResult:
    params: RetentionParams
    objective_value: float
    iterations: int
    converged: bool
    start_index: int = 0
    mode: str = MODE_PINNED
    start_objectives: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'params': self.params.to_dict(),
            'objective': self.objective_value,
            'iterations': self.iterations,
            'converged': self.converged,
            'start_index': self.start_index,
            'mode': self.mode,
        }


def calibrate_normal(r) -> AdvectionDiffusionParams:
    """
    Closed-form fit of the advection-diffusion model.

    With dt = 1 the fitted increment law N(D dt, 2 V dt) has the sample mean
    and MLE variance.

    Args:
        r: ReturnSeries or array-like with at least 4 values

    Returns:
        AdvectionDiffusionParams with D = mean and V = variance / 2
    """
    summary = sample_moments(r)
    if summary.degenerate:
        raise DegenerateSampleError(
            f"All {summary.count} returns equal {summary.mean!r}; V cannot be estimated."
        )
    return AdvectionDiffusionParams(D=summary.mean, V=summary.variance / 2.0)


def theoretical_moments(params: RetentionParams, dt: float = TIME_STEP_DAYS) -> tuple:
    """Model variance and excess kurtosis over one step: (2(1-k)K2 dt, 6kK4/((1-k)K2^2 dt))."""
    moments = retention_moments(params, dt)
    return moments.variance, moments.excess_kurtosis


def _relative_error_sq(value: float, target: float) -> float:
    if target != 0:
        return ((value - target) / target) ** 2
    return (value - target) ** 2


def retention_objective(params: RetentionParams, targets: MomentTargets) -> float:
    """
    Sum of squared moment errors, each scaled by its target.
    """
    variance, excess = theoretical_moments(params, targets.dt)
    return (_relative_error_sq(variance, targets.variance)
            + _relative_error_sq(excess, targets.excess_kurtosis))


# --- Search coordinates ---
# pinned: (logit k, log K4); full: (logit k, log K2, log K4)

def _pinned_k2(k: float, targets: MomentTargets) -> float:
    return targets.variance / (2.0 * (1.0 - k) * targets.dt)


def _exact_k4(k: float, K2: float, targets: MomentTargets) -> float:
    """K4 at which the kurtosis equation holds exactly for given k and K2."""
    return targets.excess_kurtosis * (1.0 - k) * K2 ** 2 * targets.dt / (6.0 * k)


def _params_from_coords(z: np.ndarray, targets: MomentTargets, pin_k2: bool) -> RetentionParams | None:
    k = float(expit(z[0]))
    if not 0.0 < k < 1.0:
        return None
    if pin_k2:
        K2, K4 = _pinned_k2(k, targets), float(np.exp(z[1]))
    else:
        K2, K4 = float(np.exp(z[1])), float(np.exp(z[2]))
    if not (np.isfinite(K2) and np.isfinite(K4) and K2 > 0 and K4 > 0):
        return None
    return RetentionParams(k, K2, K4)


def _coord_objective(z: np.ndarray, targets: MomentTargets, pin_k2: bool) -> float:
    params = _params_from_coords(z, targets, pin_k2)
    if params is None:
        return np.inf
    return retention_objective(params, targets)


def _start_points(targets: MomentTargets, config: CalibrationConfig) -> np.ndarray:
    """Scrambled Sobol points spread around the k = 1/2 solution."""
    K2_ref = _pinned_k2(0.5, targets)
    K4_ref = _exact_k4(0.5, K2_ref, targets)
    centre = [0.0, np.log(K4_ref)] if config.pin_k2 else [0.0, np.log(K2_ref), np.log(K4_ref)]
    half = ([CALIBRATION_CONFIG['logit_range'], CALIBRATION_CONFIG['log_k4_range']] if config.pin_k2
            else [CALIBRATION_CONFIG['logit_range'], 1.0, CALIBRATION_CONFIG['log_k4_range']])

    rng = stream_rng(config.seed, STREAM_TAGS['calibration'])
    sampler = qmc.Sobol(d=len(centre), scramble=True, seed=rng)
    m = int(np.ceil(np.log2(config.n_starts)))
    unit = sampler.random_base2(m)[:config.n_starts]
    return np.asarray(centre) + (2.0 * unit - 1.0) * np.asarray(half)


def _run_start(index: int, start: np.ndarray, targets: MomentTargets,
               config: CalibrationConfig) -> tuple:
    options = {
        'maxiter': config.max_iter,
        'xatol': CALIBRATION_CONFIG['xatol'],
        'fatol': CALIBRATION_CONFIG['fatol'],
    }
    first = optimize.minimize(_coord_objective, start, args=(targets, config.pin_k2),
                              method='Nelder-Mead', options=options)
    # One restart from the best vertex to escape a collapsed simplex
    second = optimize.minimize(_coord_objective, first.x, args=(targets, config.pin_k2),
                               method='Nelder-Mead', options=options)
    best = second if second.fun <= first.fun else first
    params = _params_from_coords(best.x, targets, config.pin_k2)
    if params is not None and config.pin_k2 and params.k > 0:
        # Kurtosis is linear in K4 once k and K2 are fixed
        polished = RetentionParams(params.k, params.K2, _exact_k4(params.k, params.K2, targets))
        if retention_objective(polished, targets) <= best.fun:
            params = polished
    objective = retention_objective(params, targets) if params is not None else np.inf
    logger.debug("Start %d: objective %.3e after %d iterations", index, objective,
                 first.nit + second.nit)
    return index, params, float(objective), int(first.nit + second.nit)


def calibrate_retention(targets: MomentTargets, config: CalibrationConfig | None = None) -> CalibrationResult:
    """
    Moment-matching fit of the retention model.

    Runs a Nelder-Mead search from each of `n_starts` deterministic
    low-discrepancy starts (in parallel when n_jobs > 1) and keeps the one
    with the smallest objective, ties going to the lower start index.

    Args:
        targets: Empirical variance and excess kurtosis
        config: Optimizer settings

    Returns:
        CalibrationResult; converged is False when no start reached the tolerance

    Raises:
        NotLeptokurticError: excess kurtosis target is not positive
    """
    config = config or CalibrationConfig()
    if not targets.excess_kurtosis > 0:
        raise NotLeptokurticError(targets.excess_kurtosis)

    starts = _start_points(targets, config)

    def one_start(index, start):
        return _run_start(index, start, targets, config)

    outcomes = run_blocks(one_start, list(enumerate(starts)), config.n_jobs)
    index, params, objective, iterations = min(outcomes, key=lambda o: (o[2], o[0]))
    if params is None:
        raise DomainError("No calibration start produced valid parameters.")

    converged = objective < config.tolerance
    mode = MODE_PINNED if config.pin_k2 else MODE_FULL
    logger.info("Retention calibration (%s): objective %.3e from start %d, converged=%s",
                mode, objective, index, converged)
    if not converged:
        message = (f"Retention calibration did not reach tolerance {config.tolerance:.0e}; "
                   f"best objective {objective:.3e}.")
        logger.warning(message)
        warnings.warn(message, AccuracyWarning, stacklevel=2)

    return CalibrationResult(
        params=params,
        objective_value=objective,
        iterations=sum(o[3] for o in outcomes),
        converged=converged,
        start_index=index,
        mode=mode,
        start_objectives=[o[2] for o in sorted(outcomes, key=lambda o: o[0])],
    )

