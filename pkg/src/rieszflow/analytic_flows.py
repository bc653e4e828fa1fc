"""Closed-form flow curves started at Dirac measures.

Curves are evaluated to measure descriptors (``ScalingFamilyPoint``,
``QuantileGrid`` or ``DiscreteMeasure``); sampling is left to ``measures``.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from rieszflow.equilibrium import EquilibriumSolution, equilibrium_unit
from rieszflow.errors import DomainError, NoSteepestDescentError, UnsupportedError
from rieszflow.kernels import Kernel, Riesz, discrepancy, discrepancy_1d_quantile
from rieszflow.measures import DiscreteMeasure, QuantileGrid, ScalingFamilyPoint

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


def _check_time(t: float) -> None:
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")


def interaction_scale(t: float, r: float, energy: float) -> float:
    """alpha_t = (-t r (2 - r) E)^(1/(2-r))."""
    _check_time(t)
    if r == 1:
        return -t * energy
    return (-t * r * (2.0 - r) * energy) ** (1.0 / (2.0 - r))


def _solution(d: int, r: float, energy: Optional[float]) -> EquilibriumSolution:
    sol = equilibrium_unit(d, r)
    if energy is None:
        return sol
    return EquilibriumSolution(sol.eta_star, energy, d, r)


def interaction_flow_eval(
    d: int, r: float, t: float, energy: Optional[float] = None
) -> ScalingFamilyPoint:
    """Steepest descent flow of the interaction energy from delta_0.

    ``energy`` overrides E_K(eta*); by default it is taken from
    ``equilibrium_unit(d, r)``.
    """
    if r < 1 and t == 0:
        raise NoSteepestDescentError(f"no steepest descent direction at delta_0 for r={r}")
    sol = _solution(d, r, energy)
    return ScalingFamilyPoint(sol.eta_star, interaction_scale(t, r, sol.energy))


def delayed_flow_eval(
    d: int, r: float, t0: float, t: float, energy: Optional[float] = None
) -> ScalingFamilyPoint:
    """The flow that rests at delta_0 until ``t0`` and then explodes."""
    _check_time(t0)
    _check_time(t)
    if t0 > 0 and not 1 < r < 2:
        raise UnsupportedError(f"a delayed start requires r in (1, 2), got {r}")
    sol = _solution(d, r, energy)
    if t < t0:
        return ScalingFamilyPoint(sol.eta_star, 0.0)
    return ScalingFamilyPoint(sol.eta_star, interaction_scale(t - t0, r, sol.energy))


def one_particle_hitting_time(p, q, r: float) -> float:
    distance = float(np.linalg.norm(np.asarray(q, float) - np.asarray(p, float)))
    return distance ** (2.0 - r) / (r * (2.0 - r))


def one_particle_eval(p, q, r: float, t: float) -> Tuple[np.ndarray, bool]:
    """Position of a single particle flowing towards delta_q, and whether it arrived."""
    if not 1 < r < 2:
        raise UnsupportedError(f"the one-particle flow needs r in (1, 2), got {r}")
    _check_time(t)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    offset = q - p
    distance = float(np.linalg.norm(offset))
    if distance == 0:
        return q.copy(), True
    remaining = distance ** (2.0 - r) - r * (2.0 - r) * t
    if remaining <= 0:
        return q.copy(), True
    return q - offset / distance * remaining ** (1.0 / (2.0 - r)), False


def disc1d_flow_eval(q0: QuantileGrid, q: float, t: float) -> QuantileGrid:
    """Discrepancy flow towards delta_q from a 1D measure given by quantiles."""
    _check_time(t)
    s = QuantileGrid.nodes(q0.n)
    values = q0.values
    below = np.minimum(values + 2.0 * s * t, q)
    above = np.maximum(values + 2.0 * s * t - 2.0 * t, q)
    flowed = np.where(values < q, below, np.where(values > q, above, q))
    return QuantileGrid(flowed)


def geodesic_comparison_eval(
    d: int, t: float, energy: Optional[float] = None
) -> ScalingFamilyPoint:
    """((t - 1) e1 - E t Id)_# eta* for r = 1."""
    _check_time(t)
    sol = _solution(d, 1.0, energy)
    shift = np.zeros(d)
    shift[0] = t - 1.0
    return ScalingFamilyPoint(sol.eta_star, -sol.energy * t, tuple(shift))


def centered_composite_eval(d: int, r: float, p, q, t: float) -> ScalingFamilyPoint:
    """Explosion (alpha_t Id)_# eta* transported along the one-particle path."""
    position, _ = one_particle_eval(p, q, r, t)
    if position.size != d:
        raise DomainError(f"p and q must be {d}-vectors")
    sol = equilibrium_unit(d, r)
    return ScalingFamilyPoint(sol.eta_star, interaction_scale(t, r, sol.energy), tuple(position))


def dirac_line_flow(x0: float, q: float, t: float) -> float:
    """Flow restricted to Dirac measures: unit speed towards q, absorbed there."""
    _check_time(t)
    if x0 < q:
        return min(x0 + t, q)
    if x0 > q:
        return max(x0 - t, q)
    return q


# Restricted flow on U[m - sqrt(3) sigma, m + sqrt(3) sigma] (mean m, std sigma).


@dataclass(frozen=True)
class MSigmaState:
    m: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError(f"sigma must be nonnegative, got {self.sigma}")


@dataclass(frozen=True)
class SubgradientSet:
    """Marker for states where the objective is not differentiable."""

    state: MSigmaState
    reason: str


FD_STEP = 1e-6


def _uniform_grid(state: MSigmaState, n: int) -> QuantileGrid:
    s = QuantileGrid.nodes(n)
    return QuantileGrid(state.m + 2.0 * SQRT3 * state.sigma * (s - 0.5))


def msigma_value(state: MSigmaState, kernel: Kernel, target: QuantileGrid) -> float:
    """Discrepancy between U[m - sqrt3 sigma, m + sqrt3 sigma] and the target."""
    grid = _uniform_grid(state, target.n)
    if isinstance(kernel, Riesz) and kernel.r == 1:
        return discrepancy_1d_quantile(grid, target)
    return discrepancy(kernel, grid.to_atomic(), target.to_atomic()).discrepancy


def _dirac_location(target: QuantileGrid) -> Optional[float]:
    values = target.values
    return float(values[0]) if values[0] == values[-1] else None


def _finite_difference(
    state: MSigmaState, kernel: Kernel, target: QuantileGrid, one_sided_sigma: bool
) -> np.ndarray:
    m, sigma = state.m, state.sigma
    hm = FD_STEP * max(1.0, abs(m))
    grad_m = (
        msigma_value(MSigmaState(m + hm, sigma), kernel, target)
        - msigma_value(MSigmaState(m - hm, sigma), kernel, target)
    ) / (2.0 * hm)

    hs = FD_STEP * max(1.0, sigma)
    if one_sided_sigma:
        grad_sigma = (
            msigma_value(MSigmaState(m, sigma + hs), kernel, target)
            - msigma_value(state, kernel, target)
        ) / hs
    else:
        # F(m, sigma) = F(m, -sigma): the measure is symmetric under s -> 1 - s.
        grad_sigma = (
            msigma_value(MSigmaState(m, sigma + hs), kernel, target)
            - msigma_value(MSigmaState(m, abs(sigma - hs)), kernel, target)
        ) / (2.0 * hs)
    return np.array([grad_m, grad_sigma])


def msigma_value_and_grad(
    state: MSigmaState, kernel: Kernel, target: QuantileGrid
) -> Tuple[float, Union[np.ndarray, SubgradientSet]]:
    value = msigma_value(state, kernel, target)
    riesz_abs = isinstance(kernel, Riesz) and kernel.r == 1
    anchor = _dirac_location(target) if riesz_abs else None

    if anchor is not None and abs(state.m - anchor) >= SQRT3 * state.sigma:
        if state.m != anchor:
            return value, np.array([math.copysign(1.0, state.m - anchor), -1.0 / SQRT3])
        # the target itself: zero is the selected subgradient
        return value, np.zeros(2)
    if state.sigma == 0 and isinstance(kernel, Riesz):
        return value, SubgradientSet(state, "sigma = 0: the Riesz objective has a kink")
    return value, _finite_difference(state, kernel, target, one_sided_sigma=False)


def msigma_descent_direction(
    state: MSigmaState, kernel: Kernel, target: QuantileGrid
) -> np.ndarray:
    """Gradient, or a one-sided selection where only a subgradient set exists."""
    _, grad = msigma_value_and_grad(state, kernel, target)
    if isinstance(grad, SubgradientSet):
        return _finite_difference(state, kernel, target, one_sided_sigma=True)
    return grad


def msigma_flow(
    initial: MSigmaState, kernel: Kernel, target: QuantileGrid, dt: float, steps: int
) -> List[MSigmaState]:
    """Explicit Euler on the (m, sigma) plane with sigma clamped at zero."""
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    trajectory = [initial]
    state = initial
    for _ in range(steps):
        grad = msigma_descent_direction(state, kernel, target)
        state = MSigmaState(state.m - dt * grad[0], max(state.sigma - dt * grad[1], 0.0))
        trajectory.append(state)
    logger.debug("msigma flow ended at m=%r sigma=%r", state.m, state.sigma)
    return trajectory


def double_well_split_eval(w: float, t: float) -> DiscreteMeasure:
    """(1 - w) delta_{-1 + e^-t} + w delta_{1 - e^-t}, coincident atoms merged."""
    if not 0 <= w <= 1:
        raise DomainError(f"w must lie in [0, 1], got {w}")
    _check_time(t)
    offset = 1.0 - math.exp(-t)
    measure = DiscreteMeasure([[-offset], [offset]], [1.0 - w, w])
    return measure.merged()


def double_well_energy(m: DiscreteMeasure) -> float:
    """int 1/2 min((x - 1)^2, (x + 1)^2) dm."""
    x = m.points[:, 0]
    return float(m.weights @ (0.5 * np.minimum((x - 1.0) ** 2, (x + 1.0) ** 2)))


# Tagged variants for callers that want to hold a curve and evaluate it later.


@dataclass(frozen=True)
class InteractionFlow:
    d: int
    r: float
    energy: Optional[float] = None

    def at(self, t: float) -> ScalingFamilyPoint:
        return interaction_flow_eval(self.d, self.r, t, self.energy)


@dataclass(frozen=True)
class DelayedInteractionFlow:
    t0: float
    inner: InteractionFlow

    def at(self, t: float) -> ScalingFamilyPoint:
        inner = self.inner
        return delayed_flow_eval(inner.d, inner.r, self.t0, t, inner.energy)


@dataclass(frozen=True)
class OneParticleFlow:
    p: Tuple[float, ...]
    q: Tuple[float, ...]
    r: float

    def at(self, t: float) -> Tuple[np.ndarray, bool]:
        return one_particle_eval(self.p, self.q, self.r, t)


@dataclass(frozen=True)
class Disc1DFlow:
    q0: QuantileGrid
    q: float

    def at(self, t: float) -> QuantileGrid:
        return disc1d_flow_eval(self.q0, self.q, t)


@dataclass(frozen=True)
class GeodesicComparison:
    d: int
    energy: Optional[float] = None

    def at(self, t: float) -> ScalingFamilyPoint:
        return geodesic_comparison_eval(self.d, t, self.energy)


@dataclass(frozen=True)
class CenteredComposite:
    d: int
    r: float
    p: Tuple[float, ...]
    q: Tuple[float, ...]

    def at(self, t: float) -> ScalingFamilyPoint:
        return centered_composite_eval(self.d, self.r, self.p, self.q, t)


@dataclass(frozen=True)
class DoubleWellSplit:
    w: float

    def at(self, t: float) -> DiscreteMeasure:
        return double_well_split_eval(self.w, t)


FlowCurve = Union[
    InteractionFlow,
    DelayedInteractionFlow,
    OneParticleFlow,
    Disc1DFlow,
    GeodesicComparison,
    CenteredComposite,
    DoubleWellSplit,
]
