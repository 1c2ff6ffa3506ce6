"""
Tests for angular moments, stresses, moment equations and Toeplitz realizability.
"""
import math

import numpy as np
import pytest

from core.errors import InsufficientDataError
from core.models.fields import ScalarField, VectorField
from core.models.grid import TWO_PI, Grid
from core.models.states import AngularDistribution, DoiState
from core.processing.initial_conditions import von_mises_distribution
from core.processing.kinetic_doi import DoiIntegrator, fp_rhs
from core.processing.moments import (
    elastic_stress,
    elastic_stress_evolution,
    moment_bound_violation,
    moment_evolution_residual,
    moment_evolution_rhs,
    moment_tensor,
    toeplitz_realizability,
    trig_moments,
    viscous_stress,
)
from core.processing.spectral import velocity_gradient

N_THETA = 64


def _quadrature_moment(f: AngularDistribution, p: int, q: int) -> np.ndarray:
    theta = f.theta_points(N_THETA)[:, None, None]
    samples = f.reconstruct(N_THETA)
    return (np.cos(theta) ** p * np.sin(theta) ** q * samples).sum(axis=0) * (TWO_PI / N_THETA)


def _constant_modes(grid, values) -> AngularDistribution:
    coefficients = np.zeros((len(values),) + grid.shape, dtype=np.complex128)
    for j, value in enumerate(values):
        coefficients[j] = value
    return AngularDistribution(grid, coefficients)


class TestMomentTensor:
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
    def test_matches_quadrature(self, doi_state, n):
        tensor = moment_tensor(doi_state.f, n)
        for p in range(n + 1):
            expected = _quadrature_moment(doi_state.f, p, n - p)
            np.testing.assert_allclose(tensor.by_exponents(p, n - p).values, expected, atol=1e-12)

    def test_component_accepts_any_order(self, doi_state):
        tensor = moment_tensor(doi_state.f, 4)
        assert tensor.component(2, 1, 2, 1) is tensor.component(1, 1, 2, 2)

    def test_order_beyond_cutoff(self, grid):
        with pytest.raises(InsufficientDataError):
            moment_tensor(AngularDistribution.uniform(grid, 2), 3)

    def test_zeroth_moment_is_density(self, doi_state):
        np.testing.assert_allclose(moment_tensor(doi_state.f, 0).components[()].values,
                                   doi_state.f.density().values, atol=1e-13)

    def test_bounded_by_density(self, doi_state):
        assert moment_bound_violation(doi_state.f, 4) <= 0.0
        assert trig_moments(doi_state.f).bound_violation() <= 0.0


class TestStress:
    def test_elastic_stress_matches_quadrature(self, doi_state):
        f = doi_state.f
        sigma = elastic_stress(f)
        m0 = _quadrature_moment(f, 0, 0)
        np.testing.assert_allclose(sigma.t11.values, 2 * _quadrature_moment(f, 2, 0) - m0, atol=1e-12)
        np.testing.assert_allclose(sigma.t12.values, 2 * _quadrature_moment(f, 1, 1), atol=1e-12)
        np.testing.assert_allclose(sigma.t22.values, 2 * _quadrature_moment(f, 0, 2) - m0, atol=1e-12)

    def test_isotropic_density_has_no_elastic_stress(self, grid):
        assert elastic_stress(AngularDistribution.uniform(grid, 4)).norm_squared() == 0.0

    def test_elastic_stress_needs_second_mode(self, grid):
        with pytest.raises(InsufficientDataError):
            elastic_stress(AngularDistribution.uniform(grid, 1))

    def test_viscous_stress_matches_quadrature(self, doi_state):
        f = doi_state.f
        kappa = velocity_gradient(doi_state.u)
        sigma = viscous_stress(f, kappa, eta=1.5, dealiased=False)
        theta = f.theta_points(N_THETA)[:, None, None]
        m = (np.cos(theta), np.sin(theta))
        stretch = sum(kappa.component(i, j).values * m[i - 1] * m[j - 1] for i in (1, 2) for j in (1, 2))
        samples = f.reconstruct(N_THETA)
        for k, l in ((1, 1), (1, 2), (2, 2)):
            expected = 1.5 * (stretch * m[k - 1] * m[l - 1] * samples).sum(axis=0) * (TWO_PI / N_THETA)
            np.testing.assert_allclose(sigma.component(k, l).values, expected, atol=1e-12)

    def test_viscous_stress_is_linear_in_gradient(self, doi_state):
        kappa = velocity_gradient(doi_state.u)
        single = viscous_stress(doi_state.f, kappa, eta=1.0)
        double = viscous_stress(doi_state.f, kappa + kappa, eta=1.0)
        assert (double - single.scaled(2.0)).norm_squared() <= 1e-24 * max(1.0, single.norm_squared())

    def test_viscous_stress_needs_fourth_mode(self, doi_state):
        with pytest.raises(InsufficientDataError):
            viscous_stress(doi_state.f.with_modes(3), velocity_gradient(doi_state.u), eta=1.0)


class TestToeplitz:
    def test_uniform_density(self, grid):
        report = toeplitz_realizability(trig_moments(AngularDistribution.uniform(grid, 4)))
        assert report.ok
        assert report.min_eigenvalue.min() == pytest.approx(TWO_PI)

    def test_violation_detected(self, grid):
        f = _constant_modes(grid, [1.0, 1.0, 0.0, 0.0, 0.0])
        report = toeplitz_realizability(trig_moments(f))
        assert not report.ok
        assert report.violation_count == grid.nx * grid.ny
        assert report.min_eigenvalue.max() == pytest.approx(TWO_PI * (1 - math.sqrt(3)))
        assert report.worst_relative == pytest.approx(1 - math.sqrt(3))

    def test_lower_order_passes(self, grid):
        f = _constant_modes(grid, [1.0, 0.5, 0.0, 0.0, 0.0])
        assert toeplitz_realizability(trig_moments(f), J=1).ok

    def test_nonnegative_density_is_realizable(self, doi_state):
        assert toeplitz_realizability(trig_moments(doi_state.f)).ok

    def test_truncation_defect_shrinks_with_cutoff(self):
        grid = Grid(nx=8, ny=8)
        direction, density = ScalarField.constant(grid, 0.0), ScalarField.constant(grid, 1.0)
        worst = {}
        for J in (4, 8):
            f = von_mises_distribution(grid, J, 3.0, direction, density).with_modes(32)
            worst[J] = toeplitz_realizability(trig_moments(f)).worst_relative
        assert worst[4] < 0.0
        assert worst[8] > 0.1 * worst[4]


class TestMomentEquations:
    @pytest.mark.parametrize("n", [0, 2, 4])
    def test_rhs_matches_kinetic_right_side(self, doi_state, doi_params, n):
        rhs = moment_evolution_rhs(doi_state, n, doi_params)
        kinetic = moment_tensor(fp_rhs(doi_state, doi_params), n)
        for index, value in rhs.items():
            np.testing.assert_allclose(value.values, kinetic.components[index].values, atol=1e-10)

    def test_rhs_needs_two_extra_modes(self, grid, doi_params):
        with pytest.raises(InsufficientDataError):
            moment_evolution_rhs(DoiState.equilibrium(grid, 5), 4, doi_params)

    def test_elastic_stress_relaxes_at_rest(self, grid, doi_params):
        f = _constant_modes(grid, [1.0 / TWO_PI, 0.1, 0.05 + 0.02j, 0.01, 0.005])
        state = DoiState(VectorField.zeros(grid), f)
        rate = elastic_stress_evolution(state, doi_params)
        sigma = elastic_stress(f)
        for got, want in zip(rate.entries(), sigma.entries()):
            np.testing.assert_allclose(got.values, -4.0 * doi_params.k * want.values, atol=1e-13)

    def test_residual_small_along_run(self, grid, doi_params, doi_state):
        integrator = DoiIntegrator(grid, doi_state.J, doi_params)
        history = [doi_state]
        for _ in range(3):
            history.append(integrator.step(history[-1]))
        result = moment_evolution_residual(history, 2, doi_params)
        assert result.max_abs < 1e-4
        assert result.t == pytest.approx(history[-2].t)

    def test_residual_rejects_odd_order(self, doi_state, doi_params):
        with pytest.raises(InsufficientDataError):
            moment_evolution_residual([doi_state] * 3, 1, doi_params)
