"""
Utility functions shared by the simulation modules.

Random draws are organised in fixed-size blocks of paths. Each block owns a
generator keyed by (seed, stream tag, block index), so a path depends only on
the seed, its stream and its index, never on how many workers ran the blocks.
"""
import logging
from pathlib import Path
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from config import SIMULATION_CONFIG
from errors import DomainError

logger = logging.getLogger(__name__)


def stream_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Returns an independent numpy generator for a (seed, keys...) stream.

    Args:
        seed: Non-negative integer seed
        *keys: Non-negative integers naming the stream (model tag, block index)

    Returns:
        numpy Generator instance
    """
    if seed < 0 or any(key < 0 for key in keys):
        raise DomainError(f"Seeds and stream keys must be non-negative, got {(seed, *keys)}")
    return np.random.default_rng([int(seed), *(int(key) for key in keys)])


def path_blocks(n_paths: int, block_size: int | None = None) -> list[tuple[int, int, int]]:
    """
    Splits path indices into consecutive blocks.

    Returns:
        List of (block_index, start, stop) tuples covering range(n_paths)
    """
    block_size = block_size or SIMULATION_CONFIG['block_size']
    return [
        (index, start, min(start + block_size, n_paths))
        for index, start in enumerate(range(0, n_paths, block_size))
    ]


def run_blocks(func: Callable, blocks: list[tuple], n_jobs: int | None = None) -> list:
    """
    Runs func(*block) for every block and returns the results in block order.

    Threads are used because the work is numpy-bound.
    """
    n_jobs = n_jobs or SIMULATION_CONFIG['n_jobs']
    if n_jobs == 1 or len(blocks) <= 1:
        return [func(*block) for block in blocks]
    logger.debug("Running %d blocks on %d workers", len(blocks), n_jobs)
    return Parallel(n_jobs=n_jobs, prefer='threads')(delayed(func)(*block) for block in blocks)


def ensure_parent(file_path) -> Path:
    """Creates the parent directory of file_path if needed and returns it as a Path."""
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
