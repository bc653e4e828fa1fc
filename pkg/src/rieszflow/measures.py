"""Measure representations, samplers and exact Wasserstein-2 oracles.

Three representations are used throughout the package:

* ``DiscreteMeasure`` -- a weighted point cloud (atomic probability measure).
* ``QuantileGrid`` -- the quantile function of a 1D measure sampled on the
  midpoints ``s_k = (k - 1/2)/n`` of (0, 1).
* ``ScalingFamilyPoint`` -- ``(alpha Id + shift)_# base`` for one of the
  equilibrium measure variants ``UniformInterval``, ``BetaBall`` and
  ``UniformSphere``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from rieszflow.errors import (
    DimensionError,
    DomainError,
    MonotonicityError,
    SizeMismatchError,
    UnsupportedError,
)

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12
ASSIGNMENT_MAX_SIZE = 512
QUAD_EPSABS = 1e-12


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atomic probability measure sum_i w_i delta_{x_i}."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] == 0 or points.shape[1] == 0:
            raise DimensionError(f"points must be a non-empty (M, d) array, got {points.shape}")
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.shape[0] != points.shape[0]:
            raise SizeMismatchError(
                f"{points.shape[0]} points but {weights.shape[0]} weights"
            )
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("weights must be finite and nonnegative")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights sum to {math.fsum(weights)!r}, expected 1")
        if not np.all(np.isfinite(points)):
            raise DomainError("points must be finite")
        object.__setattr__(self, "points", _readonly(points))
        object.__setattr__(self, "weights", _readonly(weights))

    @classmethod
    def uniform(cls, points) -> "DiscreteMeasure":
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        size = points.shape[0]
        return cls(points, np.full(size, 1.0 / size))

    @classmethod
    def dirac(cls, point) -> "DiscreteMeasure":
        return cls(np.atleast_1d(np.asarray(point, dtype=float)).reshape(1, -1), [1.0])

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def merged(self) -> "DiscreteMeasure":
        """Merge coincident atoms and drop zero-weight atoms."""
        keep = self.weights > 0
        # + 0.0 folds -0.0 into 0.0 before the bytewise row comparison
        unique, inverse = np.unique(
            self.points[keep] + 0.0, axis=0, return_inverse=True
        )
        weights = np.bincount(inverse.reshape(-1), weights=self.weights[keep])
        return DiscreteMeasure(unique, weights / math.fsum(weights))


@dataclass(frozen=True, eq=False)
class QuantileGrid:
    """Nondecreasing samples of a quantile function at the midpoint nodes."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size == 0:
            raise SizeMismatchError("a quantile grid needs at least one node")
        if not np.all(np.isfinite(values)):
            raise DomainError("quantile values must be finite")
        if np.any(np.diff(values) < 0):
            raise MonotonicityError("quantile values must be nondecreasing")
        object.__setattr__(self, "values", _readonly(values))

    @property
    def n(self) -> int:
        return self.values.size

    @staticmethod
    def nodes(n: int) -> np.ndarray:
        return (np.arange(1, n + 1) - 0.5) / n

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "QuantileGrid":
        return cls(lo + (hi - lo) * cls.nodes(n))

    @classmethod
    def dirac(cls, x: float, n: int) -> "QuantileGrid":
        return cls(np.full(n, float(x)))

    def to_atomic(self) -> DiscreteMeasure:
        return DiscreteMeasure.uniform(self.values.reshape(-1, 1))


# Equilibrium measure variants. All are centred at the origin.


@dataclass(frozen=True)
class UniformInterval:
    halfwidth: float

    def __post_init__(self):
        if self.halfwidth < 0:
            raise DomainError("halfwidth must be nonnegative")

    @property
    def dim(self) -> int:
        return 1

    @property
    def support_radius(self) -> float:
        return self.halfwidth

    def second_moment(self) -> float:
        return self.halfwidth**2 / 3.0

    def scaled(self, c: float) -> "UniformInterval":
        return UniformInterval(c * self.halfwidth)


@dataclass(frozen=True)
class BetaBall:
    """Density proportional to (s^2 - |x|^2)^beta on the ball sB^d, beta = 1 - (r+d)/2.

    The radial law is u = rho^2/s^2 ~ Beta(d/2, beta + 1); radial integrals
    are evaluated in u with quadrature weights carrying both end-point
    singularities.
    """

    d: int
    r: float
    s: float

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be >= 1")
        if not 0 < self.r < 2:
            raise DomainError(f"Riesz exponent must lie in (0, 2), got {self.r}")
        if self.d + self.r >= 4:
            raise DomainError("BetaBall requires d + r < 4")
        if self.s < 0:
            raise DomainError("radius must be nonnegative")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def beta(self) -> float:
        return 1.0 - (self.r + self.d) / 2.0

    @property
    def support_radius(self) -> float:
        return self.s

    def _weighted_integral(self, func) -> float:
        value, _ = integrate.quad(
            func,
            0.0,
            1.0,
            weight="alg",
            wvar=(self.d / 2.0 - 1.0, self.beta),
            epsabs=QUAD_EPSABS,
            epsrel=1e-12,
        )
        return value

    def normalizer(self) -> float:
        return float(special.beta(self.d / 2.0, self.beta + 1.0))

    def total_mass(self) -> float:
        return self._weighted_integral(lambda u: 1.0) / self.normalizer()

    def radial_moment(self, k: float) -> float:
        """E|X|^k."""
        moment = self._weighted_integral(lambda u: u ** (k / 2.0))
        return self.s**k * moment / self.normalizer()

    def second_moment(self) -> float:
        return self.radial_moment(2.0)

    def scaled(self, c: float) -> "BetaBall":
        return BetaBall(self.d, self.r, c * self.s)


@dataclass(frozen=True)
class UniformSphere:
    d: int
    radius: float

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("d must be >= 1")
        if self.radius < 0:
            raise DomainError("radius must be nonnegative")

    @property
    def dim(self) -> int:
        return self.d

    @property
    def support_radius(self) -> float:
        return self.radius

    def second_moment(self) -> float:
        return self.radius**2

    def scaled(self, c: float) -> "UniformSphere":
        return UniformSphere(self.d, c * self.radius)


EquilibriumMeasure = Union[UniformInterval, BetaBall, UniformSphere]


@dataclass(frozen=True)
class ScalingFamilyPoint:
    """The measure (scale * Id + shift)_# base."""

    base: EquilibriumMeasure
    scale: float
    shift: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.scale < 0:
            raise DomainError(f"scale must be nonnegative, got {self.scale}")
        if self.shift is None:
            shift = (0.0,) * self.base.dim
        else:
            shift = tuple(float(v) for v in np.atleast_1d(self.shift))
        if len(shift) != self.base.dim:
            raise DimensionError(
                f"shift has dimension {len(shift)}, base has {self.base.dim}"
            )
        object.__setattr__(self, "shift", shift)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def shift_vector(self) -> np.ndarray:
        return np.array(self.shift)

    @property
    def support_radius(self) -> float:
        return self.scale * self.base.support_radius

    def mean(self) -> np.ndarray:
        return self.shift_vector

    def sample(self, count: int, seed: int) -> DiscreteMeasure:
        cloud = sample(self.base, count, seed)
        return DiscreteMeasure(self.scale * cloud.points + self.shift_vector, cloud.weights)


Measure = Union[DiscreteMeasure, QuantileGrid, ScalingFamilyPoint]


def quantile_of_atomic(m: DiscreteMeasure, n: int) -> QuantileGrid:
    """Left-continuous generalized inverse of the CDF at the midpoint nodes."""
    if m.dim != 1:
        raise DimensionError(f"quantile grids need a 1D measure, got dim={m.dim}")
    order = np.argsort(m.points[:, 0], kind="stable")
    xs = m.points[order, 0]
    cdf = np.cumsum(m.weights[order])
    index = np.searchsorted(cdf, QuantileGrid.nodes(n), side="left")
    return QuantileGrid(xs[np.minimum(index, xs.size - 1)])


def pushforward_affine(q: QuantileGrid, a: float, b: float) -> QuantileGrid:
    if a < 0:
        raise MonotonicityError("a negative slope reverses the quantile order")
    return QuantileGrid(a * q.values + b)


def mean(m: Measure) -> np.ndarray:
    if isinstance(m, DiscreteMeasure):
        return m.mean()
    if isinstance(m, QuantileGrid):
        return np.array([m.values.mean()])
    if isinstance(m, ScalingFamilyPoint):
        return m.mean()
    raise TypeError(f"unsupported measure type {type(m).__name__}")


def second_moment(m: Measure) -> float:
    if isinstance(m, DiscreteMeasure):
        return float(m.weights @ np.einsum("ij,ij->i", m.points, m.points))
    if isinstance(m, QuantileGrid):
        return float(np.mean(m.values**2))
    if isinstance(m, ScalingFamilyPoint):
        # mean(base) = 0 for every built-in variant
        shift = m.shift_vector
        return m.scale**2 * m.base.second_moment() + float(shift @ shift)
    raise TypeError(f"unsupported measure type {type(m).__name__}")


def w2_1d(a: QuantileGrid, b: QuantileGrid) -> float:
    if a.n != b.n:
        raise SizeMismatchError(f"grid sizes differ: {a.n} != {b.n}")
    return math.sqrt(float(np.mean((a.values - b.values) ** 2)))


def _is_uniform(m: DiscreteMeasure) -> bool:
    return bool(np.all(np.abs(m.weights - 1.0 / m.size) <= 1e-15))


def w2_assignment(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Exact W2 between equal-size uniform clouds by linear assignment."""
    if a.size != b.size:
        raise UnsupportedError(f"cloud sizes differ: {a.size} != {b.size}")
    if a.dim != b.dim:
        raise DimensionError(f"dimensions differ: {a.dim} != {b.dim}")
    if not (_is_uniform(a) and _is_uniform(b)):
        raise UnsupportedError("assignment oracle needs uniform weights")
    if a.size > ASSIGNMENT_MAX_SIZE:
        raise UnsupportedError(
            f"assignment oracle is limited to {ASSIGNMENT_MAX_SIZE} atoms"
        )
    cost = cdist(a.points, b.points, metric="sqeuclidean")
    rows, cols = linear_sum_assignment(cost)
    return math.sqrt(float(cost[rows, cols].sum()) / a.size)


def w2_scaling_family(p: ScalingFamilyPoint, q: ScalingFamilyPoint) -> float:
    if p.base != q.base or p.shift != q.shift:
        raise UnsupportedError("scaling family points must share base and shift")
    return abs(p.scale - q.scale) * math.sqrt(p.base.second_moment())


def _sphere_directions(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    gauss = rng.standard_normal((count, d))
    return gauss / np.linalg.norm(gauss, axis=1, keepdims=True)


def sample(base: EquilibriumMeasure, count: int, seed: int) -> DiscreteMeasure:
    """Draw ``count`` i.i.d. samples of ``base`` with a fixed seed.

    The d=1 uniform interval and the d=2 arcsine ball are coordinate
    projections of the uniform measure on the 2-sphere in R^3.
    """
    if count < 1:
        raise DomainError("count must be positive")
    rng = np.random.default_rng(seed)

    if isinstance(base, UniformSphere):
        points = base.radius * _sphere_directions(rng, count, base.d)
    elif isinstance(base, UniformInterval):
        points = base.halfwidth * _sphere_directions(rng, count, 3)[:, :1]
    elif isinstance(base, BetaBall) and base.d == 2 and base.r == 1:
        points = base.s * _sphere_directions(rng, count, 3)[:, :2]
    elif isinstance(base, BetaBall):
        u = rng.beta(base.d / 2.0, base.beta + 1.0, size=count)
        directions = _sphere_directions(rng, count, base.d)
        points = base.s * np.sqrt(u)[:, None] * directions
    else:
        raise UnsupportedError(f"cannot sample {type(base).__name__}")

    return DiscreteMeasure.uniform(points)


def cloud_records(m: DiscreteMeasure) -> Tuple[List[str], List[Dict[str, float]]]:
    """Point cloud rows ``x1..xd,w``."""
    fieldnames = [f"x{i + 1}" for i in range(m.dim)] + ["w"]
    rows = []
    for point, weight in zip(m.points, m.weights):
        row = {f"x{i + 1}": float(v) for i, v in enumerate(point)}
        row["w"] = float(weight)
        rows.append(row)
    return fieldnames, rows


def quantile_records(q: QuantileGrid) -> Tuple[List[str], List[Dict[str, float]]]:
    """Quantile grid rows ``s,q``."""
    rows = [
        {"s": float(s), "q": float(v)} for s, v in zip(QuantileGrid.nodes(q.n), q.values)
    ]
    return ["s", "q"], rows


def cloud_from_rows(rows: Sequence[Dict[str, str]]) -> DiscreteMeasure:
    """Inverse of ``cloud_records``; a missing ``w`` column means uniform weights."""
    if not rows:
        raise SizeMismatchError("empty point cloud")
    columns = sorted(
        (key for key in rows[0] if key.startswith("x")), key=lambda key: int(key[1:])
    )
    if not columns:
        raise DimensionError("point cloud rows need x1..xd columns")
    points = np.array([[float(row[key]) for key in columns] for row in rows])
    if "w" not in rows[0]:
        return DiscreteMeasure.uniform(points)
    weights = np.array([float(row["w"]) for row in rows])
    return DiscreteMeasure(points, weights / math.fsum(weights))
