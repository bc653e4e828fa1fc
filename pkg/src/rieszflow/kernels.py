"""Kernels, interaction/potential/discrepancy energies and their gradients."""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from rieszflow.errors import (
    DimensionError,
    DomainError,
    SizeMismatchError,
    UnsupportedError,
)
from rieszflow.measures import DiscreteMeasure, QuantileGrid, w2_assignment
from rieszflow.processing import map_row_blocks, sum_row_blocks

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Riesz:
    """K(x, y) = -|x - y|^r."""

    r: float

    def __post_init__(self):
        if not 0 < self.r < 2:
            raise DomainError(f"Riesz exponent must lie in (0, 2), got {self.r}")


@dataclass(frozen=True)
class Wendland:
    """K(x, y) = (1 - |x-y|/2)^2 (|x-y| + 1) for |x-y| <= 2, else 0 (1D only)."""


Kernel = Union[Riesz, Wendland]


@dataclass(frozen=True)
class EnergyReport:
    interaction: float
    potential: float
    target_self_energy: float
    discrepancy: float


def _wendland(dist: np.ndarray) -> np.ndarray:
    inside = dist <= 2.0
    return np.where(inside, (1.0 - dist / 2.0) ** 2 * (dist + 1.0), 0.0)


def kernel_matrix(k: Kernel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"dimensions differ: {x.shape[1]} != {y.shape[1]}")
    dist = cdist(x, y)
    if isinstance(k, Riesz):
        return -(dist**k.r)
    if x.shape[1] != 1:
        raise UnsupportedError("the Wendland kernel is only used in one dimension")
    return _wendland(dist)


def kernel_eval(k: Kernel, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return float(kernel_matrix(k, x.reshape(1, -1), y.reshape(1, -1))[0, 0])


def _is_abs_1d(k: Kernel, dim: int) -> bool:
    return isinstance(k, Riesz) and k.r == 1 and dim == 1


def _abs_sums(x: np.ndarray, y: np.ndarray, v: np.ndarray) -> np.ndarray:
    """sum_j v_j |x_i - y_j| for every i in O((N + P) log P)."""
    order = np.argsort(y, kind="stable")
    ys, vs = y[order], v[order]
    v_cum = np.concatenate([[0.0], np.cumsum(vs)])
    vy_cum = np.concatenate([[0.0], np.cumsum(vs * ys)])
    idx = np.searchsorted(ys, x, side="right")
    v_le, vy_le = v_cum[idx], vy_cum[idx]
    return x * (2.0 * v_le - v_cum[-1]) - (2.0 * vy_le - vy_cum[-1])


def _weighted_pair_sum(
    k: Kernel, x: np.ndarray, w: np.ndarray, y: np.ndarray, v: np.ndarray, workers: int
) -> float:
    """sum_i sum_j w_i v_j K(x_i, y_j)."""
    if _is_abs_1d(k, x.shape[1]):
        return -float(w @ _abs_sums(x[:, 0], y[:, 0], v))

    def block_sum(block: slice) -> float:
        return float(w[block] @ (kernel_matrix(k, x[block], y) @ v))

    return sum_row_blocks(x.shape[0], block_sum, workers=workers)


def interaction_energy(k: Kernel, m: DiscreteMeasure, workers: int = 1) -> float:
    """1/2 sum_i sum_j w_i w_j K(x_i, x_j)."""
    return 0.5 * _weighted_pair_sum(k, m.points, m.weights, m.points, m.weights, workers)


def potential_energy(
    k: Kernel, m: DiscreteMeasure, target: DiscreteMeasure, workers: int = 1
) -> float:
    """sum_i w_i V(x_i) with V(x) = -sum_j v_j K(x, y_j)."""
    if m.dim != target.dim:
        raise DimensionError(f"dimensions differ: {m.dim} != {target.dim}")
    return -_weighted_pair_sum(
        k, m.points, m.weights, target.points, target.weights, workers
    )


def discrepancy(
    k: Kernel, m: DiscreteMeasure, target: DiscreteMeasure, workers: int = 1
) -> EnergyReport:
    """Squared discrepancy assembled from its interaction/potential/self terms."""
    interaction = interaction_energy(k, m, workers)
    potential = potential_energy(k, m, target, workers)
    self_energy = interaction_energy(k, target, workers)
    return EnergyReport(
        interaction=interaction,
        potential=potential,
        target_self_energy=self_energy,
        discrepancy=interaction + potential + self_energy,
    )


def discrepancy_1d_quantile(q_mu: QuantileGrid, q_nu: QuantileGrid) -> float:
    """Midpoint quadrature of the L2 form of the r=1 discrepancy."""
    if q_mu.n != q_nu.n:
        raise SizeMismatchError(f"grid sizes differ: {q_mu.n} != {q_nu.n}")
    n = q_mu.n
    s = QuantileGrid.nodes(n)
    linear = float(np.mean((1.0 - 2.0 * s) * (q_mu.values + q_nu.values)))
    cross = _abs_sums(q_mu.values, q_nu.values, np.full(n, 1.0 / n))
    return linear + float(np.mean(cross))


def _riesz_rows(
    x: np.ndarray, y: np.ndarray, v: np.ndarray, r: float, workers: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Per row i: sum_j v_j |x_i-y_j|^r and sum_j v_j r (x_i-y_j)|x_i-y_j|^(r-2).

    Coincident pairs contribute zero to the field.
    """

    def block_rows(block: slice):
        diff = x[block, None, :] - y[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        positive = dist > 0
        safe = np.where(positive, dist, 1.0)
        factor = np.where(positive, r * safe ** (r - 2.0), 0.0)
        sums = (dist**r) @ v
        field = np.einsum("ij,ijk->ik", factor * v[None, :], diff)
        return sums, field

    parts = map_row_blocks(x.shape[0], block_rows, workers=workers)
    return (
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts], axis=0),
    )


def _require_descent_exponent(k: Kernel) -> float:
    if not isinstance(k, Riesz):
        raise UnsupportedError("gradient fields are implemented for Riesz kernels")
    if k.r < 1:
        raise UnsupportedError(
            f"no steepest descent direction exists for r={k.r} < 1"
        )
    return k.r


def grad_interaction_field(k: Kernel, m: DiscreteMeasure, workers: int = 1) -> np.ndarray:
    """grad G(x_i) for G(x) = int K(x, y) dm(y), at every atom of ``m``."""
    r = _require_descent_exponent(k)
    _, field = _riesz_rows(m.points, m.points, m.weights, r, workers)
    return -field


def particle_objective(
    points: np.ndarray, target: DiscreteMeasure, r: float, workers: int = 1
) -> Tuple[float, np.ndarray]:
    """Value and gradient of F_M for the uniform cloud ``points``."""
    _require_descent_exponent(Riesz(r))
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != target.dim:
        raise DimensionError(f"dimensions differ: {points.shape[1]} != {target.dim}")
    size = points.shape[0]
    ones = np.ones(size)

    self_sums, self_field = _riesz_rows(points, points, ones, r, workers)
    target_sums, target_field = _riesz_rows(
        points, target.points, target.weights, r, workers
    )
    value = -float(np.sum(self_sums)) / (2.0 * size**2) + float(np.sum(target_sums)) / size
    grad = -self_field / size**2 + target_field / size
    return value, grad


def convexity_lambda_bound(r: float, s: float) -> float:
    """Largest lambda compatible with midpoint lambda-convexity on the two-atom geodesic."""
    return (1.0 - 1.25 ** (r / 2.0)) * 4.0 / s ** (2.0 - r)


def convexity_violation_witness(
    r: float, s: float, lam: float, functional: str = "interaction"
) -> bool:
    """True iff lambda-convexity fails at the midpoint of the two-atom geodesic.

    The geodesic moves the atom at (s, s/2) to (s, -s/2) while the atom at the
    origin stays put. ``functional`` is ``"interaction"`` or ``"discrepancy"``
    (against the Dirac at -e1).
    """
    if s <= 0:
        raise DomainError("s must be positive")
    kernel = Riesz(r)
    origin = np.zeros(2)
    start = DiscreteMeasure.uniform([origin, [s, s / 2.0]])
    end = DiscreteMeasure.uniform([origin, [s, -s / 2.0]])
    midpoint = DiscreteMeasure.uniform([origin, [s, 0.0]])

    if functional == "interaction":

        def energy(m: DiscreteMeasure) -> float:
            return interaction_energy(kernel, m)

    elif functional == "discrepancy":
        anchor = DiscreteMeasure.dirac([-1.0, 0.0])

        def energy(m: DiscreteMeasure) -> float:
            return discrepancy(kernel, m, anchor).discrepancy

    else:
        raise UnsupportedError(f"unknown functional {functional!r}")

    w2_squared = w2_assignment(start, end) ** 2
    bound = 0.5 * energy(start) + 0.5 * energy(end) - lam / 8.0 * w2_squared
    logger.debug("midpoint energy %r vs convexity bound %r", energy(midpoint), bound)
    return energy(midpoint) > bound
