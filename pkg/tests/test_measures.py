"""Tests for measure representations and Wasserstein oracles."""

import math

import numpy as np
import pytest

from rieszflow.errors import (
    DimensionError,
    DomainError,
    MonotonicityError,
    SizeMismatchError,
    UnsupportedError,
)
from rieszflow.measures import (
    BetaBall,
    DiscreteMeasure,
    QuantileGrid,
    ScalingFamilyPoint,
    UniformInterval,
    UniformSphere,
    cloud_from_rows,
    cloud_records,
    mean,
    pushforward_affine,
    quantile_of_atomic,
    quantile_records,
    sample,
    second_moment,
    w2_1d,
    w2_assignment,
    w2_scaling_family,
)
from tests.utils import random_measure


def test_discrete_measure_validation():
    with pytest.raises(DomainError, match="sum to"):
        DiscreteMeasure([[0.0], [1.0]], [0.5, 0.4])
    with pytest.raises(SizeMismatchError):
        DiscreteMeasure([[0.0], [1.0]], [1.0])
    with pytest.raises(DomainError, match="nonnegative"):
        DiscreteMeasure([[0.0], [1.0]], [1.5, -0.5])
    with pytest.raises(DimensionError):
        DiscreteMeasure(np.zeros((0, 2)), [])


def test_discrete_measure_is_immutable():
    m = DiscreteMeasure.uniform([[0.0, 1.0], [2.0, 3.0]])
    with pytest.raises(ValueError):
        m.points[0, 0] = 5.0
    assert m.dim == 2
    assert m.size == 2
    np.testing.assert_allclose(m.mean(), [1.0, 2.0])


def test_merged_combines_coincident_atoms():
    m = DiscreteMeasure([[0.0], [-0.0], [1.0], [2.0]], [0.25, 0.25, 0.5, 0.0])
    merged = m.merged()
    assert merged.size == 2
    np.testing.assert_allclose(merged.points[:, 0], [0.0, 1.0])
    np.testing.assert_allclose(merged.weights, [0.5, 0.5])


def test_quantile_grid_rejects_decreasing_values():
    with pytest.raises(MonotonicityError):
        QuantileGrid([0.0, 1.0, 0.5])
    with pytest.raises(DomainError):
        QuantileGrid([0.0, np.inf])


@pytest.mark.parametrize(
    "points, weights, expected",
    [
        ([0.0], [1.0], [0.0, 0.0, 0.0, 0.0]),
        ([0.0, 1.0], [0.5, 0.5], [0.0, 0.0, 1.0, 1.0]),
        ([2.0, -1.0], [0.75, 0.25], [-1.0, 2.0, 2.0, 2.0]),
    ],
)
def test_quantile_of_atomic(points, weights, expected):
    m = DiscreteMeasure(np.array(points).reshape(-1, 1), weights)
    np.testing.assert_array_equal(quantile_of_atomic(m, 4).values, expected)


def test_quantile_of_atomic_requires_1d():
    with pytest.raises(DimensionError):
        quantile_of_atomic(DiscreteMeasure.dirac([0.0, 1.0]), 4)


def test_quantile_of_atomic_is_nondecreasing(rng):
    for _ in range(20):
        m = random_measure(rng, 7, 1)
        q = quantile_of_atomic(m, 33)
        assert np.all(np.diff(q.values) >= 0)


@pytest.mark.parametrize(
    "values, a, b, expected",
    [([0.0, 1.0], 2.0, 0.0, [0.0, 2.0]), ([-1.0, 1.0], 1.0, 3.0, [2.0, 4.0]), ([0.0, 0.0], 0.0, 5.0, [5.0, 5.0])],
)
def test_pushforward_affine(values, a, b, expected):
    np.testing.assert_allclose(pushforward_affine(QuantileGrid(values), a, b).values, expected)


def test_pushforward_affine_negative_slope():
    with pytest.raises(MonotonicityError):
        pushforward_affine(QuantileGrid([0.0, 1.0]), -1.0, 0.0)


def test_pushforward_second_moment_identity(rng):
    q = quantile_of_atomic(random_measure(rng, 5, 1), 64)
    a, b = 1.7, -0.3
    pushed = pushforward_affine(q, a, b)
    expected = a**2 * second_moment(q) + 2 * a * b * float(mean(q)[0]) + b**2
    assert second_moment(pushed) == pytest.approx(expected, abs=1e-10)


def test_second_moment_examples():
    assert second_moment(DiscreteMeasure.dirac([0.0])) == 0.0
    assert second_moment(DiscreteMeasure.uniform([[-2.0], [2.0]])) == pytest.approx(4.0)
    interval = ScalingFamilyPoint(UniformInterval(math.sqrt(3.0)), 1.0)
    assert second_moment(interval) == pytest.approx(1.0)
    shifted = ScalingFamilyPoint(UniformSphere(2, 1.0), 2.0, (1.0, 1.0))
    assert second_moment(shifted) == pytest.approx(4.0 + 2.0)


def test_w2_1d_examples():
    assert w2_1d(QuantileGrid.dirac(0.0, 8), QuantileGrid.dirac(1.0, 8)) == pytest.approx(1.0)
    q = QuantileGrid.uniform(-1.0, 1.0, 16)
    assert w2_1d(q, q) == 0.0
    n = 4096
    value = w2_1d(QuantileGrid.uniform(0.0, 1.0, n), QuantileGrid.uniform(0.0, 2.0, n))
    assert value == pytest.approx(1.0 / math.sqrt(3.0), abs=1.0 / n)
    with pytest.raises(SizeMismatchError):
        w2_1d(QuantileGrid.dirac(0.0, 2), QuantileGrid.dirac(0.0, 3))


def test_w2_1d_metric_properties(rng):
    for _ in range(20):
        a, b, c = (QuantileGrid(np.sort(rng.standard_normal(32))) for _ in range(3))
        assert w2_1d(a, b) == pytest.approx(w2_1d(b, a), abs=1e-12)
        assert w2_1d(a, c) <= w2_1d(a, b) + w2_1d(b, c) + 1e-10


def test_w2_assignment_examples():
    assert w2_assignment(DiscreteMeasure.dirac([0.0]), DiscreteMeasure.dirac([1.0])) == 1.0
    a = DiscreteMeasure.uniform([[0.0], [1.0]])
    b = DiscreteMeasure.uniform([[1.0], [0.0]])
    assert w2_assignment(a, b) == 0.0


def test_w2_assignment_matches_sorting(rng):
    for _ in range(100):
        size = int(rng.integers(1, 65))
        a = random_measure(rng, size, 1, uniform=True)
        b = random_measure(rng, size, 1, uniform=True)
        expected = w2_1d(quantile_of_atomic(a, size), quantile_of_atomic(b, size))
        assert w2_assignment(a, b) == pytest.approx(expected, abs=1e-12)


def test_w2_assignment_errors():
    with pytest.raises(UnsupportedError, match="sizes"):
        w2_assignment(DiscreteMeasure.dirac([0.0]), DiscreteMeasure.uniform([[0.0], [1.0]]))
    with pytest.raises(UnsupportedError, match="uniform"):
        w2_assignment(
            DiscreteMeasure([[0.0], [1.0]], [0.3, 0.7]),
            DiscreteMeasure.uniform([[0.0], [1.0]]),
        )


def test_w2_scaling_family():
    base = UniformInterval(math.sqrt(3.0))
    assert w2_scaling_family(ScalingFamilyPoint(base, 1.0), ScalingFamilyPoint(base, 2.0)) == pytest.approx(1.0)
    assert w2_scaling_family(ScalingFamilyPoint(base, 0.0), ScalingFamilyPoint(base, 0.7)) == pytest.approx(0.7)
    assert w2_scaling_family(ScalingFamilyPoint(base, 0.3), ScalingFamilyPoint(base, 0.3)) == 0.0
    with pytest.raises(UnsupportedError):
        w2_scaling_family(ScalingFamilyPoint(base, 1.0), ScalingFamilyPoint(base, 1.0, (1.0,)))


def test_beta_ball_normalization_and_moments():
    ball = BetaBall(2, 1.0, 2.0)
    assert ball.beta == pytest.approx(-0.5)
    assert ball.total_mass() == pytest.approx(1.0, abs=1e-10)
    # Arcsine-type radial law: E|X|^2 = s^2 * (d/2) / (d/2 + beta + 1) = 2 s^2 / 3.
    assert ball.second_moment() == pytest.approx(8.0 / 3.0, rel=1e-9)
    with pytest.raises(DomainError):
        BetaBall(3, 1.0, 1.0)


def test_sample_sphere_has_unit_norm():
    cloud = sample(UniformSphere(3, 1.0), 1000, seed=1)
    np.testing.assert_allclose(np.linalg.norm(cloud.points, axis=1), 1.0, atol=1e-12)


def test_sample_is_deterministic():
    base = BetaBall(2, 1.0, 1.0)
    a, b = sample(base, 500, seed=7), sample(base, 500, seed=7)
    np.testing.assert_array_equal(a.points, b.points)


def test_projected_interval_samples_are_uniform():
    cloud = sample(UniformInterval(1.0), 100_000, seed=3)
    x = np.sort(cloud.points[:, 0])
    empirical = np.arange(1, x.size + 1) / x.size
    ks = np.max(np.abs(empirical - (x + 1.0) / 2.0))
    assert ks < 0.02


def test_projected_disk_samples_follow_arcsine_radius():
    s = 1.5
    cloud = sample(BetaBall(2, 1.0, s), 100_000, seed=4)
    rho = np.sort(np.linalg.norm(cloud.points, axis=1))
    empirical = np.arange(1, rho.size + 1) / rho.size
    exact = 1.0 - np.sqrt(1.0 - np.minimum(rho / s, 1.0) ** 2)
    assert np.max(np.abs(empirical - exact)) < 0.02


def test_sample_general_beta_ball_second_moment():
    ball = BetaBall(1, 1.5, 1.0)
    cloud = sample(ball, 200_000, seed=5)
    assert second_moment(cloud) == pytest.approx(ball.second_moment(), rel=0.02)


def test_scaling_family_sample_is_shifted():
    point = ScalingFamilyPoint(UniformSphere(2, 1.0), 0.5, (3.0, -1.0))
    cloud = point.sample(200, seed=0)
    np.testing.assert_allclose(np.linalg.norm(cloud.points - [3.0, -1.0], axis=1), 0.5)
    with pytest.raises(DimensionError):
        ScalingFamilyPoint(UniformSphere(2, 1.0), 1.0, (0.0,))


def test_cloud_records_round_trip():
    m = DiscreteMeasure([[0.0, 1.0], [2.0, -1.0]], [0.25, 0.75])
    fields, rows = cloud_records(m)
    assert fields == ["x1", "x2", "w"]
    back = cloud_from_rows([{k: str(v) for k, v in row.items()} for row in rows])
    np.testing.assert_array_equal(back.points, m.points)
    np.testing.assert_array_equal(back.weights, m.weights)


def test_cloud_from_rows_without_weights_is_uniform():
    m = cloud_from_rows([{"x1": "0"}, {"x1": "1"}, {"x1": "3"}])
    np.testing.assert_allclose(m.weights, 1.0 / 3.0)


def test_quantile_records():
    fields, rows = quantile_records(QuantileGrid([0.0, 1.0]))
    assert fields == ["s", "q"]
    assert rows == [{"s": 0.25, "q": 0.0}, {"s": 0.75, "q": 1.0}]
