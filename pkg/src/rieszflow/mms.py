"""Minimizing movement scheme for the Riesz interaction energy from delta_0.

Every step of the scheme is a scaled copy of eta*; the scale at step n is
(-t_n r E)^(1/(2-r)), where the times t_n solve a scalar root equation

    h_tau(t, t_{n-1}) = t_{n-1}^(1/(2-r)) t^((1-r)/(2-r)) - t + tau = 0.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from rieszflow.equilibrium import EquilibriumSolution, equilibrium_unit
from rieszflow.errors import DomainError, RangeError, SolverFailureError
from rieszflow.measures import ScalingFamilyPoint

logger = logging.getLogger(__name__)

MAX_BRACKET_DOUBLINGS = 6
BRACKET_EPS = 1e-12


@dataclass(frozen=True)
class RootSolverConfig:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_iter: int = 100

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("solver tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be positive")


def _exponents(r: float) -> Tuple[float, float]:
    if not 0 < r < 2:
        raise DomainError(f"Riesz exponent must lie in (0, 2), got {r}")
    return 1.0 / (2.0 - r), (1.0 - r) / (2.0 - r)


def h_tau_eval(t: float, s: float, tau: float, r: float) -> float:
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    p, q = _exponents(r)
    return s**p * t**q - t + tau


def _h_and_slope(t: float, sp: float, q: float, tau: float) -> Tuple[float, float]:
    power = sp * t**q
    return power - t + tau, q * power / t - 1.0


def solve_next_time(
    s: float, tau: float, r: float, cfg: Optional[RootSolverConfig] = None
) -> float:
    """Unique positive zero of h_tau(., s).

    Safeguarded Newton: a Newton step is accepted only while it stays inside
    the current sign-change bracket, otherwise the bracket is bisected.
    """
    cfg = cfg or RootSolverConfig()
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if s < 0:
        raise DomainError(f"previous time must be nonnegative, got {s}")
    p, q = _exponents(r)
    if r == 1:
        return s + tau
    if s == 0:
        return tau

    sp = s**p
    low = s + min(2.0 - r, 1.0) * tau * (1.0 - BRACKET_EPS)
    high = s + max(2.0 - r, 1.0) * tau * (1.0 + BRACKET_EPS)
    # h is decreasing through its root: h(low) > 0 > h(high).
    for _ in range(MAX_BRACKET_DOUBLINGS + 1):
        h_low = _h_and_slope(low, sp, q, tau)[0]
        h_high = _h_and_slope(high, sp, q, tau)[0]
        if h_low >= 0 >= h_high:
            break
        width = high - low
        low = max(low - width, s * 0.5)
        high = high + width
    else:
        raise SolverFailureError(
            f"no sign change for s={s!r}, tau={tau!r}, r={r!r} after bracket expansion"
        )

    t = 0.5 * (low + high)
    for iteration in range(cfg.max_iter):
        value, slope = _h_and_slope(t, sp, q, tau)
        if abs(value) <= cfg.abs_tol * (1.0 + t):
            logger.debug("root %r after %d iterations", t, iteration)
            return t
        if value > 0:
            low = t
        else:
            high = t
        step = t - value / slope if slope != 0 else low - 1.0
        if low < step < high:
            t = step
        else:
            t = 0.5 * (low + high)
        if high - low <= cfg.rel_tol * t:
            return t
    raise SolverFailureError(
        f"Newton iteration did not converge for s={s!r}, tau={tau!r}, r={r!r}"
    )


@dataclass(frozen=True)
class MmsTrajectory:
    tau: float
    r: float
    energy: float
    times: Tuple[float, ...]

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def scale_at(self, n: int) -> float:
        return (-self.times[n] * self.r * self.energy) ** (1.0 / (2.0 - self.r))

    def measure_at(self, n: int, sol: EquilibriumSolution) -> ScalingFamilyPoint:
        return ScalingFamilyPoint(sol.eta_star, self.scale_at(n))

    def step_of(self, t: float) -> int:
        """Index n with t in ((n-1) tau, n tau]; 0 for t = 0."""
        if t < 0 or t > self.steps * self.tau * (1.0 + 1e-12):
            raise RangeError(f"t={t} outside [0, {self.steps * self.tau}]")
        return min(int(math.ceil(t / self.tau - 1e-12)), self.steps)


def run_mms(
    tau: float,
    r: float,
    n_steps: int,
    sol: Optional[EquilibriumSolution] = None,
    cfg: Optional[RootSolverConfig] = None,
) -> MmsTrajectory:
    """Iterate ``solve_next_time`` from t_0 = 0. ``sol`` defaults to eta* in d=1."""
    if n_steps < 1:
        raise DomainError(f"n_steps must be >= 1, got {n_steps}")
    energy = (sol or equilibrium_unit(1, r)).energy
    times = [0.0]
    for n in range(1, n_steps + 1):
        if r == 1:
            times.append(n * tau)
        else:
            times.append(solve_next_time(times[-1], tau, r, cfg))
    logger.info("MMS tau=%r r=%r: t_%d = %r", tau, r, n_steps, times[-1])
    return MmsTrajectory(tau=tau, r=r, energy=energy, times=tuple(times))


def limit_curve(t, r: float) -> np.ndarray:
    """f(t) = ((2 - r) t)^(1/(2-r))."""
    return (
        (2.0 - r) * np.asarray(t, dtype=float)
    ) ** (1.0 / (2.0 - r))


def f_curves(
    traj: MmsTrajectory, t_grid: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray]:
    """Piecewise-constant f_tau and the limit f on ``t_grid``."""
    times = np.asarray(traj.times)
    exponent = 1.0 / (2.0 - traj.r)
    indices = [traj.step_of(float(t)) for t in t_grid]
    f_tau = times[indices] ** exponent
    return f_tau, limit_curve(t_grid, traj.r)


def sup_error(traj: MmsTrajectory, horizon: float) -> float:
    """Exact sup over [0, horizon] of |f_tau - f|.

    f_tau is constant on every ((n-1) tau, n tau] and f is monotone there, so
    the supremum is attained at the interval ends.
    """
    last = traj.step_of(horizon)
    exponent = 1.0 / (2.0 - traj.r)
    worst = 0.0
    for n in range(1, last + 1):
        level = traj.times[n] ** exponent
        left = (n - 1) * traj.tau
        right = min(n * traj.tau, horizon)
        ends = limit_curve([left, right], traj.r)
        worst = max(worst, float(np.max(np.abs(level - ends))))
    return worst


def error_bound(tau: float, r: float, n: int) -> float:
    """Bound on |t_n - (2 - r) tau n|.

    tau (r-1) (1 + (1 + log n) / (4 - 2r)) for r in [1, 2). For r in (0, 1) the
    per-step deficit is only bounded by (1-r)(2-r) tau / (2(n-1)), which gives
    tau (1-r) (1 + (2 - r)(1 + log n) / 2).
    """
    log_term = 1.0 + math.log(n)
    if r >= 1:
        return tau * (r - 1.0) * (1.0 + log_term / (4.0 - 2.0 * r))
    return tau * (1.0 - r) * (1.0 + (2.0 - r) * log_term / 2.0)


def error_bound_check(traj: MmsTrajectory, n: int) -> bool:
    """|t_n - (2 - r) tau n| within ``error_bound``."""
    if n < 1 or n > traj.steps:
        raise RangeError(f"step {n} outside 1..{traj.steps}")
    deviation = abs(traj.times[n] - (2.0 - traj.r) * traj.tau * n)
    slack = 1e-12 * (1.0 + traj.times[n])
    return deviation <= error_bound(traj.tau, traj.r, n) + slack


def step_bound_violations(traj: MmsTrajectory) -> int:
    """Count increments violating the monotone step bounds.

    For r in [1, 2) increments lie in [(2-r) tau, (2-r) tau + c_n tau] with
    c_n = (r-1)/((4-2r)(n-1)) for n >= 2; for r in (0, 1) they lie in
    [tau, (2-r) tau].
    """
    tau, r = traj.tau, traj.r
    slack = 1e-12 * (1.0 + traj.times[-1])
    base = (2.0 - r) * tau
    violations = 0
    for n in range(1, traj.steps + 1):
        increment = traj.times[n] - traj.times[n - 1]
        if r < 1:
            if increment < tau - slack or increment > base + slack:
                violations += 1
            continue
        c_n = (r - 1.0) / ((4.0 - 2.0 * r) * (n - 1)) if n >= 2 else math.inf
        if increment < base - slack or increment > base + c_n * tau + slack:
            violations += 1
    return violations
