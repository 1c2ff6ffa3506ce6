"""
Tests for the kinetic Doi model.

Validates:
- the uniform rest state is a fixed point and mass is conserved
- the Fokker-Planck mode coupling against a dense θ-quadrature of −∂θ(hf) + k∂²θf
- drift coefficients of simple flows and the decay rate of ĉ₂ under pure rotation
- x-independent relaxation against the exact mode decay
- second-order convergence of the time stepper
- the energy identity of the velocity right side
- the Galerkin cutoff acts on u and the stress while f keeps every mode
- free-energy decay along a run
- positivity checks in the entropy functional
"""
import math

import numpy as np
import pytest
import scipy.fft
import scipy.integrate

from core.errors import PositivityError
from core.models.fields import ScalarField, TensorField2x2, VectorField
from core.models.grid import TORUS_AREA, TWO_PI, Grid
from core.models.states import AngularDistribution, DoiParams, DoiState
from core.processing.initial_conditions import taylor_green
from core.processing.kinetic_doi import (
    DoiIntegrator,
    doi_velocity_rhs,
    fisher_information,
    fp_drift_coefficients,
    fp_drift_modes,
    fp_rhs,
    free_energy,
    free_energy_dissipation,
    viscous_dissipation,
)
from core.processing.moments import elastic_stress
from core.processing.spectral import divergence, galerkin_mask, velocity_gradient, velocity_gradient_norm_squared
from core.services.experiment_manager import state_distance
from tests.conftest import make_doi_state


def _x_independent(grid, J: int) -> AngularDistribution:
    coefficients = np.zeros((J + 1,) + grid.shape, dtype=np.complex128)
    for j in range(J + 1):
        coefficients[j] = (0.3**j) * np.exp(0.7j * j) / TWO_PI
    return AngularDistribution(grid, coefficients)


def _drift_oracle(f: AngularDistribution, u: VectorField, k: float, n_theta: int = 128) -> np.ndarray:
    """Modes of −∂θ(hf) + k∂²θf with h = m⊥·((∇u)m), by quadrature in θ."""
    kappa = velocity_gradient(u)
    theta = np.arange(n_theta) * (TWO_PI / n_theta)
    c, s = np.cos(theta)[:, None, None], np.sin(theta)[:, None, None]
    k11, k12, k21, k22 = (kappa.component(i, j).values[None] for i, j in ((1, 1), (1, 2), (2, 1), (2, 2)))
    h = -s * (k11 * c + k12 * s) + c * (k21 * c + k22 * s)
    flux = scipy.fft.fft(h * f.reconstruct(n_theta), axis=0, norm="forward")
    j = np.arange(f.J + 1)[:, None, None]
    return -1j * j * flux[: f.J + 1] - k * j**2 * f.coefficients


class TestEquilibrium:
    def test_fixed_point(self, grid, doi_params):
        state = DoiState.equilibrium(grid, 8)
        integrator = DoiIntegrator(grid, 8, doi_params)
        for _ in range(5):
            state = integrator.step(state)
        np.testing.assert_allclose(state.f.coefficients[0], 1.0, atol=1e-14)
        np.testing.assert_allclose(state.f.coefficients[1:], 0.0, atol=1e-14)
        assert state.u.norm() < 1e-14

    def test_mass_conserved(self, grid, doi_params, doi_state):
        integrator = DoiIntegrator(grid, doi_state.J, doi_params)
        mass = doi_state.f.density().integral()
        state = doi_state
        for _ in range(5):
            state = integrator.step(state)
        assert state.f.density().integral() == pytest.approx(mass, rel=1e-12)

    def test_zero_mode_stays_real(self, grid, doi_params, doi_state):
        state = DoiIntegrator(grid, doi_state.J, doi_params).step(doi_state)
        assert np.all(state.f.coefficients[0].imag == 0.0)


class TestFokkerPlanck:
    def test_drift_matches_quadrature(self, grid, doi_params):
        J = 8
        state = DoiState(taylor_green(grid, 0.8), _x_independent(grid, J))
        rhs = fp_rhs(state, doi_params).coefficients
        expected = _drift_oracle(state.f, state.u, doi_params.k)
        np.testing.assert_allclose(rhs[: J - 1], expected[: J - 1], atol=1e-12)

    def test_rest_velocity_gives_diffusion_only(self, grid, doi_params, doi_state):
        state = DoiState(VectorField.zeros(grid), doi_state.f)
        rhs = fp_rhs(state, doi_params).coefficients
        ksq = grid.wavenumbers().ksq
        for j in range(state.J + 1):
            laplacian_j = scipy.fft.ifft2(-ksq * scipy.fft.fft2(state.f.coefficients[j]))
            expected = doi_params.nu * laplacian_j - doi_params.k * j**2 * state.f.coefficients[j]
            np.testing.assert_allclose(rhs[j], expected, atol=1e-12)


class TestFreeEnergy:
    def test_equilibrium_values(self, grid):
        state = DoiState.equilibrium(grid, 8)
        energy = free_energy(state)
        assert energy.total == pytest.approx(0.0, abs=1e-12)
        assert state.f.density().integral() == pytest.approx(TWO_PI * TORUS_AREA)
        assert fisher_information(state).theta_part == pytest.approx(0.0, abs=1e-12)

    def test_decays_along_run(self, grid, doi_params, doi_state):
        integrator = DoiIntegrator(grid, doi_state.J, doi_params)
        state = doi_state
        energies = [free_energy(state).total]
        for _ in range(5):
            state = integrator.step(state)
            energies.append(free_energy(state).total)
        assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))

    def test_dissipation_is_positive(self, doi_params, doi_state):
        assert free_energy_dissipation(doi_state, doi_params) > 0.0
        assert viscous_dissipation(doi_state, doi_params) >= 0.0

    def test_viscous_dissipation_off_without_eta(self, doi_state):
        assert viscous_dissipation(doi_state, DoiParams(eta=0.0)) == 0.0

    def test_negative_density_rejected(self, grid):
        coefficients = np.zeros((5,) + grid.shape, dtype=np.complex128)
        coefficients[0] = 1.0
        coefficients[1] = 1.0
        state = DoiState(VectorField.zeros(grid), AngularDistribution(grid, coefficients))
        with pytest.raises(PositivityError):
            free_energy(state)


class TestVelocity:
    def test_rest_with_uniform_density(self, grid, doi_params):
        rhs = doi_velocity_rhs(DoiState.equilibrium(grid, 8), doi_params)
        assert rhs.norm() <= 1e-14

    def test_divergence_free(self, doi_params, doi_state):
        rhs = doi_velocity_rhs(doi_state, doi_params)
        assert divergence(rhs).max_abs() <= 1e-10 * rhs.norm()

    def test_elastic_stress_drives_rest_fluid(self, grid, doi_params):
        coefficients = np.zeros((5,) + grid.shape, dtype=np.complex128)
        coefficients[0] = 1.0 / TWO_PI
        x1, _ = grid.coordinates()
        coefficients[2] = 0.1 * np.cos(x1) / TWO_PI
        state = DoiState(VectorField.zeros(grid), AngularDistribution(grid, coefficients))
        rhs = doi_velocity_rhs(state, doi_params)
        # σ_E12 = −Im s₂ = 0 and σ_E11 depends on x₁ only: a pure gradient, removed by ℙ
        assert rhs.norm() <= 1e-12


def _constant_gradient(grid, t11=0.0, t12=0.0, t21=0.0, t22=0.0) -> TensorField2x2:
    return TensorField2x2(*(ScalarField.constant(grid, value) for value in (t11, t12, t21, t22)))


class TestDriftCoefficients:
    @pytest.mark.parametrize("entries, expected", [
        ({"t21": 1.0}, (0.5, 0.5, 0.0)),
        ({"t21": 1.0, "t12": -1.0}, (0.0, 1.0, 0.0)),
        ({"t11": 1.0, "t22": -1.0}, (0.0, 0.0, -1.0)),
    ])
    def test_simple_flows(self, entries, expected):
        grid = Grid(nx=8, ny=8)
        a, b, c = fp_drift_coefficients(_constant_gradient(grid, **entries))
        for got, want in zip((a, b, c), expected):
            np.testing.assert_allclose(got.values, want, atol=1e-15)

    def test_pure_rotation_rate(self):
        grid = Grid(nx=8, ny=8)
        J, k, b = 4, 1.0, 0.7
        coefficients = np.zeros((J + 1,) + grid.shape, dtype=np.complex128)
        coefficients[0] = 1.0 / TWO_PI
        coefficients[2] = 0.5 / TWO_PI
        zero, rotation = np.zeros(grid.shape), np.full(grid.shape, b)
        modes = np.arange(J + 1)[:, None, None]

        def rhs(_, y):
            f = AngularDistribution(grid, y.reshape(coefficients.shape))
            return (fp_drift_modes(f, zero, rotation, zero) - k * modes**2 * f.coefficients).ravel()

        t_end = 0.2
        solution = scipy.integrate.solve_ivp(rhs, (0.0, t_end), coefficients.ravel(), method="DOP853",
                                             rtol=1e-12, atol=1e-14)
        final = solution.y[:, -1].reshape(coefficients.shape)
        expected = 0.5 / TWO_PI * np.exp((-4.0 * k - 2j * b) * t_end)
        np.testing.assert_allclose(final[2], expected, atol=1e-8)
        np.testing.assert_allclose(final[0], 1.0 / TWO_PI, atol=1e-12)


class TestRelaxationOracle:
    def test_x_independent_modes_decay_exactly(self):
        grid = Grid(nx=8, ny=8)
        J = 8
        params = DoiParams(dt=1e-3)
        initial = _x_independent(grid, J)
        state = DoiState(VectorField.zeros(grid), initial)
        integrator = DoiIntegrator(grid, J, params)
        for _ in range(500):
            state = integrator.step(state)
        assert state.t == pytest.approx(0.5)
        decay = np.exp(-params.k * np.arange(J + 1) ** 2 * state.t)[:, None, None]
        np.testing.assert_allclose(state.f.coefficients, initial.coefficients * decay, atol=1e-7)


class TestTimeConvergence:
    def test_richardson_order_two(self, grid):
        t_end = 0.04
        finals = []
        for dt in (2e-3, 1e-3, 5e-4):
            state = make_doi_state(grid, np.random.default_rng(7))
            integrator = DoiIntegrator(grid, state.J, DoiParams(eta=0.5, dt=dt))
            for _ in range(round(t_end / dt)):
                state = integrator.step(state)
            finals.append(state)
        coarse, middle, fine = finals
        assert fine.t == pytest.approx(t_end)
        order = math.log2(state_distance(coarse, middle) / state_distance(middle, fine))
        assert order == pytest.approx(2.0, abs=0.3)


class TestEnergyIdentity:
    def test_velocity_rhs_balances_dissipation_and_elastic_work(self, doi_params, doi_state):
        rhs = doi_velocity_rhs(doi_state, doi_params)
        gradu = velocity_gradient(doi_state.u)
        sigma_e = elastic_stress(doi_state.f)
        elastic_work = sum(gradu.component(i, j).inner(sigma_e.component(i, j)) for i in (1, 2) for j in (1, 2))
        expected = (-velocity_gradient_norm_squared(doi_state.u) - viscous_dissipation(doi_state, doi_params)
                    - elastic_work)
        assert doi_state.u.inner(rhs) == pytest.approx(expected, rel=1e-9)


class TestGalerkin:
    def test_distribution_keeps_high_shells(self, grid, rng):
        state = make_doi_state(grid, rng, band=3)
        mask, _ = galerkin_mask(grid, 1)

        def outside(spectral: np.ndarray) -> float:
            return float(np.abs(np.where(mask, 0.0, spectral)).max())

        after = DoiIntegrator(grid, state.J, DoiParams(dt=1e-4, galerkin_ell=1)).step(state)
        for j in (0, 2):
            assert outside(state.f.spectral[j]) > 0.0
            assert outside(after.f.spectral[j]) > 0.5 * outside(state.f.spectral[j])
        assert outside(after.u.u1.spectral) < 1e-13
        assert outside(after.u.u2.spectral) < 1e-13
