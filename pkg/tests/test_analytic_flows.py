"""Tests for the closed-form flow curves."""

import math

import numpy as np
import pytest

from rieszflow.analytic_flows import (
    SQRT3,
    CenteredComposite,
    DelayedInteractionFlow,
    Disc1DFlow,
    DoubleWellSplit,
    GeodesicComparison,
    InteractionFlow,
    MSigmaState,
    OneParticleFlow,
    SubgradientSet,
    centered_composite_eval,
    delayed_flow_eval,
    dirac_line_flow,
    disc1d_flow_eval,
    double_well_energy,
    double_well_split_eval,
    geodesic_comparison_eval,
    interaction_flow_eval,
    interaction_scale,
    msigma_descent_direction,
    msigma_flow,
    msigma_value,
    msigma_value_and_grad,
    one_particle_eval,
    one_particle_hitting_time,
)
from rieszflow.equilibrium import equilibrium_unit
from rieszflow.errors import DomainError, NoSteepestDescentError, UnsupportedError
from rieszflow.kernels import Riesz, Wendland, discrepancy_1d_quantile, grad_interaction_field
from rieszflow.measures import QuantileGrid, w2_1d


class TestInteractionFlow:
    def test_interval_support_grows_linearly(self):
        for t in (0.0, 0.1, 1.0, 7.5):
            assert interaction_flow_eval(1, 1.0, t).support_radius == pytest.approx(t)

    def test_self_similar_growth(self):
        r = 1.5
        energy = equilibrium_unit(2, r).energy
        ratio = interaction_scale(2.0, r, energy) / interaction_scale(1.0, r, energy)
        assert ratio == pytest.approx(2.0 ** (1.0 / (2.0 - r)))

    def test_velocity_matches_the_interaction_field(self):
        t, n = 0.8, 200
        grid = QuantileGrid.uniform(-t, t, n)
        field = grad_interaction_field(Riesz(1.0), grid.to_atomic())
        # x(t) = (t / t0) x(t0) moves with speed x / t
        np.testing.assert_allclose(-field[:, 0], grid.values / t, atol=1e-12)

    def test_energy_override(self):
        point = interaction_flow_eval(1, 1.0, 2.0, energy=-1.0)
        assert point.scale == pytest.approx(2.0)

    def test_no_descent_direction_for_small_exponents(self):
        with pytest.raises(NoSteepestDescentError):
            interaction_flow_eval(2, 0.5, 0.0)
        with pytest.raises(DomainError):
            interaction_flow_eval(2, 1.0, -1.0)

    def test_delayed_flow(self):
        r = 1.5
        before = delayed_flow_eval(1, r, 2.0, 1.0)
        assert before.scale == 0.0
        after = delayed_flow_eval(1, r, 2.0, 3.0)
        assert after.scale == pytest.approx(interaction_flow_eval(1, r, 1.0).scale)
        with pytest.raises(UnsupportedError):
            delayed_flow_eval(1, 1.0, 2.0, 3.0)

    def test_tagged_curves(self):
        inner = InteractionFlow(1, 1.5)
        delayed = DelayedInteractionFlow(0.5, inner)
        assert delayed.at(1.5).scale == pytest.approx(inner.at(1.0).scale)
        assert InteractionFlow(1, 1.0).at(0.3).support_radius == pytest.approx(0.3)


class TestOneParticle:
    def test_hitting_time(self):
        assert one_particle_hitting_time([0.0, 0.0], [2.0, 0.0], 1.5) == pytest.approx(
            math.sqrt(2.0) / 0.75
        )

    def test_arrival(self):
        t_star = one_particle_hitting_time([0.0], [2.0], 1.5)
        position, reached = one_particle_eval([0.0], [2.0], 1.5, t_star * 1.001)
        assert reached
        np.testing.assert_array_equal(position, [2.0])
        position, reached = one_particle_eval([0.0], [2.0], 1.5, 0.5 * t_star)
        assert not reached
        assert 0.0 < position[0] < 2.0

    def test_speed(self):
        p, q, r, t, h = np.array([0.0, 0.0]), np.array([3.0, 4.0]), 1.3, 0.7, 1e-6
        ahead, _ = one_particle_eval(p, q, r, t + h)
        behind, _ = one_particle_eval(p, q, r, t - h)
        position, _ = one_particle_eval(p, q, r, t)
        velocity = (ahead - behind) / (2.0 * h)
        distance = np.linalg.norm(q - position)
        np.testing.assert_allclose(velocity, r * distance ** (r - 2.0) * (q - position), rtol=1e-6)

    def test_start_at_target(self):
        position, reached = one_particle_eval([1.0, 1.0], [1.0, 1.0], 1.5, 0.0)
        assert reached
        np.testing.assert_array_equal(position, [1.0, 1.0])

    def test_exponent_range(self):
        with pytest.raises(UnsupportedError):
            one_particle_eval([0.0], [1.0], 1.0, 0.5)

    def test_tagged_curve(self):
        position, reached = OneParticleFlow((0.0,), (2.0,), 1.5).at(100.0)
        assert reached
        assert position[0] == 2.0


class TestDiscrepancyFlow1D:
    def test_dirac_start(self):
        n = 8
        grid = disc1d_flow_eval(QuantileGrid.dirac(-1.0, n), 0.0, 0.25)
        np.testing.assert_allclose(grid.values, -1.0 + 0.5 * QuantileGrid.nodes(n))

    def test_time_zero_is_identity(self):
        q0 = QuantileGrid([-2.0, 0.0, 0.5, 3.0])
        np.testing.assert_array_equal(disc1d_flow_eval(q0, 0.0, 0.0).values, q0.values)

    def test_everything_is_absorbed(self):
        q0 = QuantileGrid([-2.0, -1.0, 0.5, 3.0])
        np.testing.assert_array_equal(disc1d_flow_eval(q0, 0.25, 1e6).values, 0.25)

    def test_discrepancy_decreases(self):
        q0 = QuantileGrid(np.linspace(-2.0, 3.0, 64))
        target = QuantileGrid.dirac(0.5, 64)
        values = [
            discrepancy_1d_quantile(disc1d_flow_eval(q0, 0.5, t), target)
            for t in np.linspace(0.0, 3.0, 31)
        ]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))

    def test_flow_is_one_lipschitz_in_w2(self):
        q0 = QuantileGrid.dirac(-1.0, 128)
        for t, h in [(0.1, 0.05), (0.4, 0.2)]:
            distance = w2_1d(disc1d_flow_eval(q0, 0.0, t), disc1d_flow_eval(q0, 0.0, t + h))
            assert distance <= 2.0 * h

    def test_tagged_curve(self):
        curve = Disc1DFlow(QuantileGrid.dirac(2.0, 4), 0.0)
        np.testing.assert_allclose(curve.at(0.5).values, 2.0 - (1.0 - QuantileGrid.nodes(4)))


def test_dirac_line_flow():
    assert dirac_line_flow(-1.0, 0.0, 0.25) == -0.75
    assert dirac_line_flow(-1.0, 0.0, 5.0) == 0.0
    assert dirac_line_flow(2.0, 0.0, 0.5) == 1.5
    assert dirac_line_flow(0.0, 0.0, 3.0) == 0.0


def test_geodesic_comparison():
    point = geodesic_comparison_eval(1, 0.5)
    assert point.support_radius == pytest.approx(0.5)
    assert point.shift == (-0.5,)
    assert GeodesicComparison(2).at(1.0).shift == (0.0, 0.0)


def test_centered_composite():
    r = 1.5
    point = centered_composite_eval(2, r, (0.0, 0.0), (2.0, 0.0), 0.5)
    position, _ = one_particle_eval([0.0, 0.0], [2.0, 0.0], r, 0.5)
    np.testing.assert_allclose(point.shift, position)
    assert point.scale == pytest.approx(interaction_flow_eval(2, r, 0.5).scale)
    assert CenteredComposite(2, r, (0.0, 0.0), (2.0, 0.0)).at(0.5) == point
    with pytest.raises(DomainError):
        centered_composite_eval(3, r, (0.0, 0.0), (2.0, 0.0), 0.5)


class TestMSigma:
    def test_negative_sigma(self):
        with pytest.raises(DomainError):
            MSigmaState(0.0, -1.0)

    def test_value_away_from_the_target(self):
        n = 1000
        target = QuantileGrid.dirac(0.0, n)
        value = msigma_value(MSigmaState(2.0, 0.5), Riesz(1.0), target)
        assert value == pytest.approx(2.0 - 0.5 / SQRT3, abs=1e-6)

    def test_closed_form_gradient(self):
        target = QuantileGrid.dirac(0.0, 256)
        _, grad = msigma_value_and_grad(MSigmaState(-2.0, 0.5), Riesz(1.0), target)
        np.testing.assert_allclose(grad, [-1.0, -1.0 / SQRT3])

    def test_finite_difference_gradient(self):
        target = QuantileGrid.uniform(-1.0, 1.0, 256)
        _, grad = msigma_value_and_grad(MSigmaState(0.3, 0.4), Riesz(1.5), target)
        assert isinstance(grad, np.ndarray)
        assert grad.shape == (2,)

    def test_kink_at_zero_sigma(self):
        target = QuantileGrid.uniform(-1.0, 1.0, 256)
        state = MSigmaState(0.2, 0.0)
        _, grad = msigma_value_and_grad(state, Riesz(1.0), target)
        assert isinstance(grad, SubgradientSet)
        direction = msigma_descent_direction(state, Riesz(1.0), target)
        # spreading the Dirac lowers the discrepancy
        assert direction[1] < 0

    def test_gradient_at_the_target_is_zero(self):
        target = QuantileGrid.dirac(0.0, 256)
        _, grad = msigma_value_and_grad(MSigmaState(0.0, 0.0), Riesz(1.0), target)
        np.testing.assert_array_equal(grad, [0.0, 0.0])

    def test_flow_matches_the_quantile_flow(self):
        n, dt, steps = 512, 0.01, 50
        target = QuantileGrid.dirac(0.0, n)
        trajectory = msigma_flow(MSigmaState(2.0, 0.0), Riesz(1.0), target, dt, steps)
        assert len(trajectory) == steps + 1
        final = trajectory[-1]
        exact = disc1d_flow_eval(QuantileGrid.dirac(2.0, n), 0.0, dt * steps)
        assert final.m == pytest.approx(float(exact.values.mean()), abs=1e-9)
        assert final.sigma == pytest.approx(0.5 / SQRT3, abs=1e-9)

    def test_flow_reaches_the_target(self):
        target = QuantileGrid.dirac(0.0, 256)
        trajectory = msigma_flow(MSigmaState(-1.0, 0.0), Riesz(1.0), target, 1e-3, 3000)
        final = trajectory[-1]
        assert abs(final.m) < 2e-2
        assert final.sigma < 2e-2

    def test_target_is_a_fixed_point(self):
        target = QuantileGrid.dirac(0.0, 128)
        trajectory = msigma_flow(MSigmaState(0.0, 0.0), Riesz(1.0), target, 0.1, 5)
        assert trajectory[-1] == MSigmaState(0.0, 0.0)

    def test_wendland_flow_decreases_the_objective(self):
        target = QuantileGrid.uniform(-0.5, 0.5, 128)
        kernel = Wendland()
        trajectory = msigma_flow(MSigmaState(1.0, 0.1), kernel, target, 0.05, 20)
        values = [msigma_value(state, kernel, target) for state in trajectory]
        assert values[-1] < values[0]

    def test_bad_step(self):
        with pytest.raises(DomainError):
            msigma_flow(MSigmaState(0.0, 0.0), Riesz(1.0), QuantileGrid.dirac(0.0, 4), 0.0, 1)


class TestDoubleWell:
    def test_split(self):
        m = double_well_split_eval(0.25, math.log(2.0))
        np.testing.assert_allclose(m.points[:, 0], [-0.5, 0.5])
        np.testing.assert_allclose(m.weights, [0.75, 0.25])

    def test_start_is_a_single_atom(self):
        m = double_well_split_eval(0.5, 0.0)
        assert m.size == 1
        assert m.points[0, 0] == 0.0

    def test_one_sided_split(self):
        m = DoubleWellSplit(0.0).at(1.0)
        assert m.size == 1
        assert m.points[0, 0] == pytest.approx(-(1.0 - math.exp(-1.0)))

    def test_energy_decays(self):
        for t in (0.0, 0.5, 2.0):
            m = double_well_split_eval(0.3, t)
            assert double_well_energy(m) == pytest.approx(0.5 * math.exp(-2.0 * t))

    def test_weight_range(self):
        with pytest.raises(DomainError):
            double_well_split_eval(1.5, 0.0)
