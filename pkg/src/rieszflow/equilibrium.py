"""Equilibrium measures of the Riesz interaction energy with a quadratic field.

``equilibrium_unit(d, r)`` returns the unit-second-moment minimizer eta* and
its energy. The proximal minimizer for step tau is ``(c_tau Id)_# eta*``.

For d + r < 4 the minimizer is a BetaBall. Its energy follows from the
equality condition at the origin: with the proximal step tau = -1/(r E) the
scale is one, and integrating the optimality condition against eta* gives
E = -2 E|X|^r / (4 - r). For d + r >= 4 it is the uniform measure on the unit
sphere, with a Gauss-summable hypergeometric energy.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate, optimize, special

from rieszflow.errors import DimensionError, DomainError
from rieszflow.kernels import Riesz, interaction_energy
from rieszflow.measures import (
    BetaBall,
    EquilibriumMeasure,
    QuantileGrid,
    ScalingFamilyPoint,
    UniformInterval,
    UniformSphere,
)

logger = logging.getLogger(__name__)

__all__ = [
    "BetaBall",
    "EquilibriumMeasure",
    "EquilibriumSolution",
    "UniformInterval",
    "UniformSphere",
    "ball_potential",
    "c_tau",
    "equilibrium_unit",
    "hypergeom_2F1",
    "hypergeom_2F1_at_1",
    "optimality_residual",
    "r_constant",
    "sphere_potential",
    "support_radius_constant",
    "thm_s_tau",
    "uniform_prox_oracle",
]

SCALE_XTOL = 1e-10
QUAD_EPSABS = 1e-11


def _nonpositive_integer(value: float) -> bool:
    return value <= 0 and float(value).is_integer()


def _terminating_order(a: float, b: float) -> Union[int, None]:
    orders = [int(-v) for v in (a, b) if _nonpositive_integer(v)]
    return min(orders) if orders else None


def _terminating_sum(a: float, b: float, c: float, x: float, order: int) -> float:
    term, total = 1.0, 1.0
    for k in range(order):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
    return total


def hypergeom_2F1_at_1(a: float, b: float, c: float, method: str = "auto") -> float:
    """2F1(a, b; c; 1).

    ``method`` is ``"series"`` (terminating series, b or a a nonpositive
    integer), ``"gauss"`` (Gauss summation, c > a + b and c > 0) or ``"auto"``.
    """
    if _nonpositive_integer(c):
        raise DomainError(f"c={c} must not be a nonpositive integer")
    order = _terminating_order(a, b)
    gauss_ok = c > a + b and c > 0

    if method == "series" or (method == "auto" and order is not None):
        if order is None:
            raise DomainError(f"2F1({a}, {b}; {c}; 1) does not terminate")
        return _terminating_sum(a, b, c, 1.0, order)

    if method not in ("auto", "gauss"):
        raise ValueError(f"unknown method {method!r}")
    if not gauss_ok:
        raise DomainError(f"Gauss summation needs c > a + b and c > 0, got ({a}, {b}, {c})")
    if _nonpositive_integer(c - a) or _nonpositive_integer(c - b):
        return 0.0

    log_value = (
        special.gammaln(c)
        + special.gammaln(c - a - b)
        - special.gammaln(c - a)
        - special.gammaln(c - b)
    )
    sign = (
        special.gammasgn(c)
        * special.gammasgn(c - a - b)
        * special.gammasgn(c - a)
        * special.gammasgn(c - b)
    )
    return float(sign * math.exp(log_value))


def hypergeom_2F1(a: float, b: float, c: float, x: ArrayLike) -> Union[float, np.ndarray]:
    """2F1(a, b; c; x) on [-1, 1].

    Terminating series (a or b a nonpositive integer) are summed exactly for
    scalar x; everything else goes to ``scipy.special.hyp2f1``.
    """
    if _nonpositive_integer(c):
        raise DomainError(f"c={c} must not be a nonpositive integer")
    if np.ndim(x) > 0:
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > 1):
            raise DomainError("series diverges outside [-1, 1]")
        return special.hyp2f1(a, b, c, x)
    x = float(x)
    order = _terminating_order(a, b)
    if order is not None:
        return _terminating_sum(a, b, c, x, order)
    if x == 1:
        return hypergeom_2F1_at_1(a, b, c)
    if abs(x) > 1:
        raise DomainError(f"series diverges at x={x}")
    return float(special.hyp2f1(a, b, c, x))


def _sphere_potential_radial(t: np.ndarray, radius: float, r: float, d: int) -> np.ndarray:
    """int |x - y|^r dU_{R S^{d-1}}(y) as a function of t = |x|."""
    t = np.asarray(t, dtype=float)
    if radius <= 0:
        return t**r
    if d == 1:
        return 0.5 * (np.abs(t - radius) ** r + np.abs(t + radius) ** r)

    a, b, c = -r / 2.0, (2.0 - r - d) / 2.0, d / 2.0
    inside = t <= radius
    safe_t = np.where(inside, radius, t)
    inner = radius**r * hypergeom_2F1(a, b, c, np.minimum(t / radius, 1.0) ** 2)
    outer = safe_t**r * hypergeom_2F1(a, b, c, np.minimum(radius / safe_t, 1.0) ** 2)
    return np.where(inside, inner, outer)


def _norms(x, d: int) -> Tuple[np.ndarray, bool]:
    points = np.atleast_1d(np.asarray(x, dtype=float))
    single = points.ndim == 1
    if points.ndim > 2 or points.shape[-1] != d:
        raise DimensionError(f"expected {d}-vectors, got shape {points.shape}")
    points = points.reshape(-1, d)
    return np.linalg.norm(points, axis=1), single


def sphere_potential(x, radius: float, r: float, d: int):
    """Riesz potential int |x - y|^r of the uniform measure on the sphere of ``radius``.

    ``x`` is a single d-vector or an (N, d) array.
    """
    norms, single = _norms(x, d)
    values = _sphere_potential_radial(norms, radius, r, d)
    return float(values[0]) if single else values


def _radial_law(measure: EquilibriumMeasure) -> Tuple[int, float, float]:
    if isinstance(measure, UniformInterval):
        return 1, 0.0, measure.halfwidth
    if isinstance(measure, BetaBall):
        return measure.d, measure.beta, measure.s
    raise DomainError(f"{type(measure).__name__} has no radial density")


def _alg_quad(func, lo: float, hi: float, wvar: Tuple[float, float]) -> float:
    value, _ = integrate.quad(
        func, lo, hi, weight="alg", wvar=wvar, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=200
    )
    return value


def ball_potential(x, measure: EquilibriumMeasure, r: float) -> float:
    """int |x - y|^r d(measure)(y) for a radial density (BetaBall or interval).

    The integral runs over the radial variable u = rho^2 / s^2 and is split at
    the kink u = |x|^2 / s^2.
    """
    d, beta, s = _radial_law(measure)
    norms, _ = _norms(x, d)
    t = float(norms[0])
    if s == 0:
        return t**r
    alpha = d / 2.0 - 1.0
    norm = special.beta(d / 2.0, beta + 1.0)

    def potential(u: float) -> float:
        return float(_sphere_potential_radial(t, s * math.sqrt(u), r, d))

    kink = (t / s) ** 2
    if 0.0 < kink < 1.0:
        left = _alg_quad(lambda u: potential(u) * (1.0 - u) ** beta, 0.0, kink, (alpha, 0.0))
        right = _alg_quad(lambda u: potential(u) * u**alpha, kink, 1.0, (0.0, beta))
        total = left + right
    else:
        total = _alg_quad(potential, 0.0, 1.0, (alpha, beta))
    return total / norm


@dataclass(frozen=True)
class EquilibriumSolution:
    eta_star: EquilibriumMeasure
    energy: float
    d: int
    r: float

    @property
    def variant(self) -> str:
        return type(self.eta_star).__name__

    @property
    def scale(self) -> float:
        return self.eta_star.support_radius

    def c_tau(self, tau: float) -> float:
        return c_tau(tau, self)

    def proximal(self, tau: float) -> ScalingFamilyPoint:
        """eta*_tau as a scaling family point on eta*."""
        return ScalingFamilyPoint(self.eta_star, c_tau(tau, self))


def _validate_dr(d: int, r: float) -> None:
    if d < 1:
        raise DimensionError(f"d must be >= 1, got {d}")
    if not 0 < r < 2:
        raise DomainError(f"Riesz exponent must lie in (0, 2), got {r}")


def _unit_ball_scale(d: int, r: float) -> float:
    def excess(s: float) -> float:
        return BetaBall(d, r, s).second_moment() - 1.0

    return optimize.brentq(excess, 1e-3, 10.0, xtol=SCALE_XTOL, rtol=1e-15)


@lru_cache(maxsize=None)
def equilibrium_unit(d: int, r: float) -> EquilibriumSolution:
    """Unit-second-moment minimizer eta* of the Riesz interaction energy."""
    _validate_dr(d, r)

    if d == 1 and r == 1:
        interval = UniformInterval(math.sqrt(3.0))
        solution = EquilibriumSolution(interval, -1.0 / math.sqrt(3.0), d, r)
    elif d + r < 4:
        ball = BetaBall(d, r, _unit_ball_scale(d, r))
        energy = -2.0 * ball.radial_moment(r) / (4.0 - r)
        solution = EquilibriumSolution(ball, energy, d, r)
    else:
        energy = -0.5 * hypergeom_2F1_at_1(-r / 2.0, (2.0 - r - d) / 2.0, d / 2.0)
        solution = EquilibriumSolution(UniformSphere(d, 1.0), energy, d, r)

    logger.debug(
        "equilibrium d=%d r=%r: %s scale=%r energy=%r",
        d,
        r,
        solution.variant,
        solution.scale,
        solution.energy,
    )
    return solution


def c_tau(tau: float, sol: EquilibriumSolution) -> float:
    """Scale mapping eta* to the proximal minimizer for step ``tau``."""
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    return (-tau * sol.r * sol.energy) ** (1.0 / (2.0 - sol.r))


def r_constant(d: int) -> float:
    """R_d = 1/2 2F1(-1/2, -(d-1)/2; d/2; 1), the sphere radius factor for r=1."""
    if d < 3:
        raise DomainError(f"R_d is defined for d >= 3, got {d}")
    return 0.5 * hypergeom_2F1_at_1(-0.5, -(d - 1) / 2.0, d / 2.0)


support_radius_constant = r_constant


def thm_s_tau(tau: float, d: int, r: float) -> float:
    """The closed-form support radius printed for the ball case.

    It disagrees with ``c_tau`` times the unit support radius (it gives tau/4
    instead of tau for d=1, r=1); kept for comparison only.
    """
    _validate_dr(d, r)
    value = (
        special.gamma(2.0 - r / 2.0)
        * special.gamma((d + r) / 2.0)
        * r
        * tau
        / (2.0 * special.gamma(d / 2.0))
    )
    return float(value ** (1.0 / (2.0 - r)))


def uniform_prox_oracle(tau: float, nodes: int = 4096) -> float:
    """Half-width a minimizing E_K(U[-a, a]) + m2/(2 tau) for r=1, by direct search.

    The interaction energy is evaluated on a midpoint quantile discretization.
    """
    kernel = Riesz(1.0)
    unit = QuantileGrid.uniform(-1.0, 1.0, nodes).to_atomic()
    unit_energy = interaction_energy(kernel, unit)
    unit_moment = float(unit.weights @ unit.points[:, 0] ** 2)

    def objective(a: float) -> float:
        return a * unit_energy + a**2 * unit_moment / (2.0 * tau)

    result = optimize.minimize_scalar(
        objective,
        bounds=(0.0, 10.0 * tau),
        method="bounded",
        options={"xatol": 1e-10 * tau},
    )
    return float(result.x)


def optimality_residual(
    tau: float, d: int, r: float, probes: Sequence
) -> Tuple[float, float]:
    """Check the optimality conditions of eta*_tau at ``probes``.

    Phi(x) = int K(x, y) d eta*_tau(y) + |x|^2 / (2 tau) must equal a constant C
    on the support and be >= C off the support. Returns the spread of Phi over
    on-support probes and the minimum of Phi - C over off-support probes
    (``inf`` without off-support probes).
    """
    sol = equilibrium_unit(d, r)
    scaled = sol.eta_star.scaled(c_tau(tau, sol))
    radius = scaled.support_radius
    norms, _ = _norms(probes, d)
    points = np.asarray(probes, dtype=float).reshape(-1, d)

    if isinstance(scaled, UniformSphere):
        potentials = _sphere_potential_radial(norms, radius, r, d)
        on_support = np.abs(norms - radius) <= 1e-9 * max(radius, 1.0)
    else:
        potentials = np.array([ball_potential(p, scaled, r) for p in points])
        on_support = norms <= radius * (1.0 + 1e-12)

    phi = -potentials + norms**2 / (2.0 * tau)
    if not np.any(on_support):
        raise DomainError("no probe lies on the support")
    level = float(np.mean(phi[on_support]))
    spread = float(np.max(phi[on_support]) - np.min(phi[on_support]))
    slack = float(np.min(phi[~on_support]) - level) if np.any(~on_support) else math.inf
    logger.debug("optimality residual: spread=%r slack=%r", spread, slack)
    return spread, slack
