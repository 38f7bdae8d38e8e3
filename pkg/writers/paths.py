"""
Simulated paths as `step,path_0,...,path_{n-1}` CSV.
"""
import logging
from pathlib import Path

from simulate import PathSet, path_summary
from utils import ensure_parent

logger = logging.getLogger(__name__)


def write_paths(pathset: PathSet, file_path) -> Path:
    path = ensure_parent(file_path)
    pathset.paths.to_csv(path, index=True, lineterminator='\n')
    logger.info("Wrote %d %s paths to %s", pathset.n_paths, pathset.model, path)
    return path


def write_path_summary(pathset: PathSet, file_path) -> Path:
    """Saves terminal, maximum and minimum prices per path."""
    path = ensure_parent(file_path)
    path_summary(pathset).to_csv(path, index=True, lineterminator='\n')
    return path
