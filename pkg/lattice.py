"""
Exact evolution and Monte Carlo sampling of the cell-redistribution rules.

Three rules move probability mass between neighbouring cells each step:

    three-state    p_n <- k p_n + (down) alpha + (up) beta
    symmetric      retention k, the rest split evenly (gamma = (1 - k) / 2)
    asymmetric     no retention, (1 + k)/2 down and (1 - k)/2 up

Sign convention: a step of +1 cell is an up-move, taken with probability
beta, so the mean displacement per step is (beta - alpha) * dx and a positive
drift D means an upward trend.

The exact evolution is the oracle that the continuum moment formulas of
`pde` are tested against.
"""
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config import LATTICE_CONFIG, STREAM_TAGS
from errors import DomainError, ResourceLimitError
from pde import AdvectionDiffusionParams
from stats import MomentSummary, moments_from_weights
from utils import path_blocks, run_blocks, stream_rng

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-12


@dataclass(frozen=True)
class ThreeStateRule:
    """Per-step probabilities of a down-step, staying, and an up-step."""

    alpha: float
    k: float
    beta: float

    def __post_init__(self):
        if min(self.alpha, self.k, self.beta) < 0:
            raise DomainError(f"Probabilities must be non-negative: {self}.")
        if abs(self.alpha + self.k + self.beta - 1.0) > PROBABILITY_TOL:
            raise DomainError(f"Probabilities must sum to 1: {self}.")


@dataclass(frozen=True)
class SymmetricRetentionRule:
    """Retains fraction k in the cell and sends gamma = (1 - k)/2 to each neighbour."""

    k: float

    def __post_init__(self):
        if not 0.0 <= self.k <= 1.0:
            raise DomainError(f"Retention fraction must lie in [0, 1], got {self.k}.")

    @property
    def gamma(self) -> float:
        return (1.0 - self.k) / 2.0


@dataclass(frozen=True)
class AsymmetricRule:
    """Moves all mass, (1 + k)/2 of it down and (1 - k)/2 of it up."""

    k: float

    def __post_init__(self):
        if not -1.0 < self.k < 1.0:
            raise DomainError(f"Asymmetry must lie in (-1, 1), got {self.k}.")


Rule = ThreeStateRule | SymmetricRetentionRule | AsymmetricRule


@dataclass(frozen=True, eq=False)
class LatticeState:
    """
    Probability mass over a contiguous range of cells.

    Array index `origin_index` sits at position 0; cell i sits at
    (i - origin_index) * cell_width.
    """

    origin_index: int
    cell_width: float
    masses: np.ndarray
    time_step: int = 0

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if masses.ndim != 1 or masses.size == 0:
            raise DomainError("Masses must be a non-empty 1-d array.")
        if self.cell_width <= 0:
            raise DomainError(f"Cell width must be positive, got {self.cell_width}.")
        if np.any(masses < 0):
            raise DomainError("Masses must be non-negative.")
        if abs(masses.sum() - 1.0) > 1e-9:
            raise DomainError(f"Masses must sum to 1, got {masses.sum()!r}.")
        masses.setflags(write=False)
        object.__setattr__(self, 'masses', masses)

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(self.masses.size) - self.origin_index) * self.cell_width

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'position': self.positions, 'mass': self.masses})


@dataclass(frozen=True)
class ContinuumScaling:
    """Cell width and time step linking the lattice to the continuum."""

    dx: float = LATTICE_CONFIG['dx']
    dt: float = LATTICE_CONFIG['dt']

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0:
            raise DomainError(f"dx and dt must be positive, got {self.dx}, {self.dt}.")

    @property
    def K1(self) -> float:
        return self.dx / self.dt

    @property
    def K2_grid(self) -> float:
        return self.dx ** 2 / self.dt

    @property
    def diffusion_coefficient(self) -> float:
        """dx^2 / (2 dt), the diffusion coefficient of the unbiased walk."""
        return self.dx ** 2 / (2.0 * self.dt)


def symmetric_walk() -> SymmetricRetentionRule:
    """The classic walk: half the mass to each neighbour, nothing retained."""
    return SymmetricRetentionRule(0.0)


def step_distribution(rule: Rule) -> dict:
    """
    Per-step displacement probabilities over {-1, 0, +1} cells.
    """
    if isinstance(rule, ThreeStateRule):
        return {-1: rule.alpha, 0: rule.k, 1: rule.beta}
    if isinstance(rule, SymmetricRetentionRule):
        return {-1: rule.gamma, 0: rule.k, 1: rule.gamma}
    if isinstance(rule, AsymmetricRule):
        return {-1: (1.0 + rule.k) / 2.0, 0: 0.0, 1: (1.0 - rule.k) / 2.0}
    raise DomainError(f"Unknown rule type {type(rule).__name__}.")


def as_three_state(rule: Rule) -> ThreeStateRule:
    """Expresses any rule as its (alpha, k, beta) probabilities."""
    pmf = step_distribution(rule)
    return ThreeStateRule(pmf[-1], pmf[0], pmf[1])


def delta_state(cell_width: float = LATTICE_CONFIG['dx']) -> LatticeState:
    """All mass in the cell at position 0."""
    return LatticeState(0, cell_width, np.array([1.0]), 0)


def evolve(initial: LatticeState, rule: Rule, steps: int, max_cells: int | None = None) -> LatticeState:
    """
    Evolves a state exactly by repeated convolution with the step pmf.

    The support grows by one cell on each side the rule can move to; nothing
    is truncated, so mass is conserved up to rounding.

    Args:
        initial: Starting state
        rule: Redistribution rule
        steps: Number of steps
        max_cells: Cap on the array length (defaults to LATTICE_CONFIG)

    Returns:
        LatticeState after `steps` steps

    Raises:
        ResourceLimitError: the final support would exceed max_cells
    """
    if steps < 0:
        raise DomainError(f"Step count must be non-negative, got {steps}.")
    max_cells = max_cells or LATTICE_CONFIG['max_cells']
    pmf = step_distribution(rule)

    grows_down = pmf[-1] > 0
    grows_up = pmf[1] > 0
    kernel = np.array([pmf[-1], pmf[0], pmf[1]])[(0 if grows_down else 1):(3 if grows_up else 2)]

    final_cells = initial.masses.size + steps * (int(grows_down) + int(grows_up))
    if final_cells > max_cells:
        raise ResourceLimitError(
            f"Evolving {steps} steps needs {final_cells} cells, above the cap of {max_cells}."
        )

    masses = np.array(initial.masses)
    for _ in range(steps):
        masses = np.convolve(masses, kernel)

    return LatticeState(
        origin_index=initial.origin_index + steps * int(grows_down),
        cell_width=initial.cell_width,
        masses=masses,
        time_step=initial.time_step + steps,
    )


def lattice_moments(state: LatticeState) -> MomentSummary:
    """Mean, variance and excess kurtosis of the mass over cell positions."""
    return moments_from_weights(state.positions, state.masses, int(state.masses.size))


def excess_kurtosis_closed_form(k: float, n: int) -> float:
    """
    Excess kurtosis of the symmetric retention walk after n steps.

    The per-step excess kurtosis is 1/(1 - k) - 3 and cumulants add over
    i.i.d. steps, giving (1/(1 - k) - 3) / n.
    """
    if not 0.0 <= k < 1.0:
        raise DomainError(f"Closed form needs 0 <= k < 1, got {k}.")
    if n < 1:
        raise DomainError(f"Step count must be positive, got {n}.")
    return (1.0 / (1.0 - k) - 3.0) / n


def continuum_params(rule: Rule, scaling: ContinuumScaling | None = None) -> AdvectionDiffusionParams:
    """
    Advection-diffusion parameters of a rule in the continuum limit.

    V = (dx^2 / 2 dt)(alpha + beta) and D = (dx / dt)(beta - alpha), so that
    n steps of the walk have variance 2 V t and mean D t at t = n dt.
    """
    scaling = scaling or ContinuumScaling()
    three = as_three_state(rule)
    return AdvectionDiffusionParams(
        D=scaling.K1 * (three.beta - three.alpha),
        V=scaling.diffusion_coefficient * (three.alpha + three.beta),
    )


def _walk_block(rule: Rule, steps: int, x0: float, dx: float, seed: int,
                block_index: int, start: int, stop: int) -> np.ndarray:
    pmf = step_distribution(rule)
    thresholds = np.array([pmf[-1], pmf[-1] + pmf[0]])
    rng = stream_rng(seed, STREAM_TAGS['lattice'], block_index)
    uniforms = rng.random((stop - start, steps))
    moves = np.searchsorted(thresholds, uniforms, side='right') - 1
    paths = np.empty((stop - start, steps + 1))
    paths[:, 0] = x0
    paths[:, 1:] = x0 + dx * np.cumsum(moves, axis=1)
    return paths


def walk_paths(rule: Rule, steps: int, n_paths: int, x0: float = 0.0,
               dx: float = LATTICE_CONFIG['dx'], seed: int = 0,
               n_jobs: int | None = None) -> np.ndarray:
    """
    Monte Carlo sample paths of a rule.

    Args:
        rule: Redistribution rule
        steps: Steps per path
        n_paths: Number of paths
        x0: Starting position
        dx: Cell width
        seed: Seed; path i depends only on (seed, i)
        n_jobs: Parallel workers for the path blocks

    Returns:
        Array of shape (n_paths, steps + 1) of positions
    """
    if n_paths < 1:
        raise DomainError(f"Need at least one path, got {n_paths}.")
    if steps < 0:
        raise DomainError(f"Step count must be non-negative, got {steps}.")
    if dx <= 0:
        raise DomainError(f"Cell width must be positive, got {dx}.")

    def block(block_index, start, stop):
        return _walk_block(rule, steps, x0, dx, seed, block_index, start, stop)

    blocks = run_blocks(block, path_blocks(n_paths), n_jobs)
    logger.debug("Sampled %d lattice paths of %d steps", n_paths, steps)
    return np.vstack(blocks)
