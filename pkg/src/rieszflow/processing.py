import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Block boundaries must not depend on the worker count.
DEFAULT_BLOCK_SIZE = 256


def resolve_workers(threads: Optional[int]) -> int:
    """Map a ``--threads`` hint to a worker count (0 or None = auto)."""
    if not threads:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError(f"threads must be >= 0, got {threads}")
    return threads


def row_blocks(n_rows: int, block_size: int = DEFAULT_BLOCK_SIZE) -> List[slice]:
    return [
        slice(start, min(start + block_size, n_rows))
        for start in range(0, n_rows, block_size)
    ]


def map_row_blocks(
    n_rows: int,
    block_processor: Callable[[slice], T],
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> List[T]:
    """Evaluate ``block_processor`` on fixed row blocks, results in block order.

    numpy releases the GIL inside the heavy array kernels, so threads give real
    speedups for the pairwise sums without copying the operands.
    """
    blocks = row_blocks(n_rows, block_size)
    if workers <= 1 or len(blocks) <= 1:
        return [block_processor(block) for block in blocks]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(block_processor, blocks))


def sum_row_blocks(
    n_rows: int,
    block_processor: Callable[[slice], float],
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> float:
    """Deterministic sum of per-block partial sums."""
    total = 0.0
    for partial in map_row_blocks(n_rows, block_processor, workers, block_size):
        total += float(partial)
    return total


def progress(iterable: Iterable[T], total: int, enabled: bool, desc: str) -> Iterable[T]:
    """Wrap ``iterable`` in a tqdm bar when ``enabled``."""
    if not enabled:
        return iterable
    return tqdm(iterable, total=total, desc=desc)
