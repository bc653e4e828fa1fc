"""Explicit Euler flows in quantile space with isotonic projection."""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from rieszflow.errors import DomainError, SizeMismatchError
from rieszflow.kernels import discrepancy_1d_quantile
from rieszflow.measures import QuantileGrid
from rieszflow.processing import progress

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Flow1DConfig:
    n: int
    dt: float
    steps: int
    snapshot_every: int = 1
    show_progress: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"grid size must be >= 2, got {self.n}")
        if self.dt <= 0:
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.steps < 0:
            raise DomainError(f"steps must be >= 0, got {self.steps}")
        if self.snapshot_every < 1:
            raise DomainError("snapshot_every must be >= 1")

    def snapshot_steps(self) -> List[int]:
        """Step indices of the emitted grids (step 0 included)."""
        return list(range(0, self.steps + 1, self.snapshot_every))

    def times(self) -> List[float]:
        return [step * self.dt for step in self.snapshot_steps()]


def isotonic_project(values: Sequence[float]) -> np.ndarray:
    """Euclidean projection onto nondecreasing vectors (pool adjacent violators)."""
    y = np.asarray(values, dtype=float).reshape(-1)
    if y.size == 0:
        return y.copy()
    fitted = isotonic_regression(y, increasing=True).x
    # running max absorbs division rounding between adjacent pools
    return np.maximum.accumulate(fitted)


def subgradient_Fnu(q: QuantileGrid, q_nu: QuantileGrid) -> np.ndarray:
    """(1 - 2 s_k) + (1/n) sum_t sgn(q_k - Q_nu(s_t)), with sgn(0) = 0."""
    if q.n != q_nu.n:
        raise SizeMismatchError(f"grid sizes differ: {q.n} != {q_nu.n}")
    n = q.n
    s = QuantileGrid.nodes(n)
    less = np.searchsorted(q_nu.values, q.values, side="left")
    greater = n - np.searchsorted(q_nu.values, q.values, side="right")
    return (1.0 - 2.0 * s) + (less - greater) / n


def _interaction_subgradient(q: QuantileGrid) -> np.ndarray:
    # Rank tie-break: on a sorted grid the repulsion sum is (n + 1 - 2k)/n.
    return 1.0 - 2.0 * QuantileGrid.nodes(q.n)


def _check_grid(q0: QuantileGrid, cfg: Flow1DConfig) -> None:
    if q0.n != cfg.n:
        raise SizeMismatchError(f"grid has {q0.n} nodes, config expects {cfg.n}")


def _euler(q0: QuantileGrid, cfg: Flow1DConfig, subgradient, desc: str) -> List[QuantileGrid]:
    _check_grid(q0, cfg)
    frames = [q0]
    q = q0
    for step in progress(range(1, cfg.steps + 1), cfg.steps, cfg.show_progress, desc):
        q = QuantileGrid(isotonic_project(q.values - cfg.dt * subgradient(q)))
        if step % cfg.snapshot_every == 0:
            frames.append(q)
    logger.debug("%s: %d steps, %d frames", desc, cfg.steps, len(frames))
    return frames


def euler_flow(q0: QuantileGrid, q_nu: QuantileGrid, cfg: Flow1DConfig) -> List[QuantileGrid]:
    """Discrepancy flow towards ``q_nu``; frames at ``cfg.snapshot_steps()``."""
    _check_grid(q_nu, cfg)
    return _euler(q0, cfg, lambda q: subgradient_Fnu(q, q_nu), "flow1d")


def interaction_flow_1d(q0: QuantileGrid, cfg: Flow1DConfig) -> List[QuantileGrid]:
    """Pure interaction flow (repulsion only)."""
    return _euler(q0, cfg, _interaction_subgradient, "interaction1d")


def discrepancy_trace(grids: Sequence[QuantileGrid], q_nu: QuantileGrid) -> List[float]:
    return [discrepancy_1d_quantile(q, q_nu) for q in grids]
