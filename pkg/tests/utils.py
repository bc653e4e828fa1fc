import numpy as np

from rieszflow.measures import DiscreteMeasure


def finite_difference(func, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of a scalar function of an array."""
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        step = h * max(1.0, abs(x[index]))
        up, down = x.copy(), x.copy()
        up[index] += step
        down[index] -= step
        grad[index] = (func(up) - func(down)) / (2.0 * step)
    return grad


def random_measure(
    rng: np.random.Generator, size: int, dim: int, uniform: bool = False
) -> DiscreteMeasure:
    """Gaussian atoms with Dirichlet (or uniform) weights."""
    points = rng.standard_normal((size, dim))
    if uniform:
        return DiscreteMeasure.uniform(points)
    return DiscreteMeasure(points, rng.dirichlet(np.ones(size)))


def relative_error(actual, expected) -> float:
    actual, expected = np.asarray(actual, float), np.asarray(expected, float)
    return float(np.max(np.abs(actual - expected)) / max(np.max(np.abs(expected)), 1e-12))
