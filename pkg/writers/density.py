"""
Density outputs of the lattice and continuum solvers.

A lattice state is one `position,mass` CSV. A grid becomes one `x,density`
CSV per stored time plus a JSON sidecar with parameters and diagnostics.
"""
import json
import logging
from pathlib import Path

from lattice import LatticeState
from pde import Grid
from utils import ensure_parent

logger = logging.getLogger(__name__)


def write_lattice_state(state: LatticeState, file_path) -> Path:
    path = ensure_parent(file_path)
    state.to_frame().to_csv(path, index=False, lineterminator='\n')
    logger.info("Wrote lattice state after %d steps to %s", state.time_step, path)
    return path


def write_grid(grid: Grid, out_dir, stem: str = 'density') -> list[Path]:
    """
    Saves every slice of a grid and its sidecar.

    Args:
        grid: Solver output
        out_dir: Destination directory, created if missing
        stem: File name prefix; slice i is `<stem>_t<i>.csv`

    Returns:
        Paths written, sidecar last
    """
    out_dir = Path(out_dir)
    written = []
    for i in range(len(grid.times)):
        path = ensure_parent(out_dir / f'{stem}_t{i}.csv')
        grid.slice_frame(i).to_csv(path, index=False, lineterminator='\n')
        written.append(path)

    sidecar = out_dir / f'{stem}.json'
    sidecar.write_text(json.dumps(grid.sidecar(), indent=2) + '\n', encoding='utf-8')
    written.append(sidecar)
    logger.info("Wrote %d density slices to %s", len(grid.times), out_dir)
    return written
