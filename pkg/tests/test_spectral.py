"""
Tests for spectral calculus on the torus.

Validates:
- derivatives, Laplacian and vorticity on trigonometric polynomials
- Leray projection (divergence-free, idempotent, mean preserved)
- stream-function inversion and its gauge check
- Galerkin eigenvalue shells, resampling and Sobolev norms
"""
import math

import numpy as np
import pytest

from core.errors import GaugeError
from core.models.fields import ScalarField, VectorField
from core.models.grid import Grid
from core.processing.initial_conditions import taylor_green
from core.processing.spectral import (
    dealias,
    divergence,
    galerkin_cutoff,
    galerkin_eigenvalues,
    galerkin_project,
    gradient,
    laplacian,
    leray_project,
    partial,
    remove_mean,
    resample,
    sobolev_norm,
    stream_function,
    top_band_energy_fraction,
    velocity_from_vorticity,
    velocity_gradient,
    vorticity,
)
from tests.conftest import sample_field


class TestDerivatives:
    def test_partial_of_sine(self, grid):
        f = sample_field(grid, lambda x1, x2: np.sin(x1) * np.cos(2 * x2))
        expected1 = sample_field(grid, lambda x1, x2: np.cos(x1) * np.cos(2 * x2))
        expected2 = sample_field(grid, lambda x1, x2: -2 * np.sin(x1) * np.sin(2 * x2))
        np.testing.assert_allclose(partial(f, 1).values, expected1.values, atol=1e-12)
        np.testing.assert_allclose(partial(f, 2).values, expected2.values, atol=1e-12)

    def test_laplacian_eigenfunction(self, grid):
        f = sample_field(grid, lambda x1, x2: np.sin(2 * x1) * np.cos(3 * x2))
        np.testing.assert_allclose(laplacian(f).values, -13.0 * f.values, atol=1e-11)

    def test_taylor_green_vorticity(self, grid):
        u = taylor_green(grid, 1.0)
        expected = sample_field(grid, lambda x1, x2: 2.0 * np.sin(x1) * np.sin(x2))
        np.testing.assert_allclose(vorticity(u).values, expected.values, atol=1e-12)
        assert divergence(u).max_abs() < 1e-12

    def test_velocity_gradient_layout(self, grid):
        u = taylor_green(grid, 1.0)
        kappa = velocity_gradient(u)
        # κ_ij = ∂_j u_i
        expected12 = sample_field(grid, lambda x1, x2: -np.sin(x1) * np.sin(x2))
        np.testing.assert_allclose(kappa.t12.values, expected12.values, atol=1e-12)
        assert (kappa.t11 + kappa.t22).max_abs() < 1e-12


class TestLerayProjection:
    def test_divergence_free_and_idempotent(self, grid, rng):
        v = VectorField(ScalarField(grid, values=rng.standard_normal(grid.shape)),
                        ScalarField(grid, values=rng.standard_normal(grid.shape)))
        p = leray_project(v)
        scale = max(c.max_abs() for c in p.components())
        assert divergence(p).max_abs() <= 1e-10 * scale
        again = leray_project(p)
        np.testing.assert_allclose(again.u1.values, p.u1.values, atol=1e-12)
        np.testing.assert_allclose(again.u2.values, p.u2.values, atol=1e-12)

    def test_mean_mode_preserved(self, grid):
        v = VectorField(ScalarField.constant(grid, 1.5), ScalarField.constant(grid, -0.5))
        p = leray_project(v)
        assert p.u1.mean() == pytest.approx(1.5)
        assert p.u2.mean() == pytest.approx(-0.5)

    def test_gradient_is_removed(self, grid):
        phi = sample_field(grid, lambda x1, x2: np.cos(x1 + 2 * x2))
        p = leray_project(gradient(phi))
        assert p.norm() < 1e-12


class TestStreamFunction:
    def test_round_trip_from_vorticity(self, grid):
        u = taylor_green(grid, 0.7)
        w = velocity_from_vorticity(vorticity(u))
        np.testing.assert_allclose(w.u1.values, u.u1.values, atol=1e-12)
        np.testing.assert_allclose(w.u2.values, u.u2.values, atol=1e-12)

    def test_poisson(self, grid):
        omega = sample_field(grid, lambda x1, x2: np.sin(x1) * np.sin(x2))
        psi = stream_function(omega)
        np.testing.assert_allclose(laplacian(psi).values, omega.values, atol=1e-12)
        assert abs(psi.mean()) < 1e-14

    def test_nonzero_mean_rejected(self, grid):
        omega = ScalarField.constant(grid, 1.0)
        with pytest.raises(GaugeError):
            stream_function(omega)

    def test_pure_nyquist_modes_are_dropped(self, grid):
        def smooth(x1, x2):
            return np.sin(x1) * np.sin(x2) + np.cos(8 * x1) * np.cos(3 * x2)

        def nyquist(x1, x2):
            return np.cos(8 * x1) + np.cos(8 * x2) + np.cos(8 * x1) * np.cos(8 * x2)

        omega = sample_field(grid, lambda x1, x2: smooth(x1, x2) + nyquist(x1, x2))
        recovered = vorticity(velocity_from_vorticity(omega))
        expected = sample_field(grid, smooth)
        np.testing.assert_allclose(recovered.values, expected.values, atol=1e-11)


class TestGalerkin:
    def test_eigenvalue_shells(self):
        assert galerkin_eigenvalues(16, 16)[:6] == (0, 1, 2, 4, 5, 8)

    def test_cutoff_index(self, grid):
        assert galerkin_cutoff(grid, 1) == (1.0, False)
        assert galerkin_cutoff(grid, 3) == (4.0, False)
        _, saturated = galerkin_cutoff(grid, 10_000)
        assert saturated

    def test_projection_keeps_low_shells(self, grid):
        low = sample_field(grid, lambda x1, x2: np.cos(x1) * np.cos(x2))
        high = sample_field(grid, lambda x1, x2: np.cos(3 * x1))
        projected = galerkin_project(low + high, 2)
        np.testing.assert_allclose(projected.values, low.values, atol=1e-12)

    def test_projection_is_idempotent(self, grid, rng):
        f = ScalarField(grid, values=rng.standard_normal(grid.shape))
        once = galerkin_project(f, 4)
        np.testing.assert_allclose(galerkin_project(once, 4).values, once.values, atol=1e-13)


class TestResampleAndNorms:
    def test_band_limited_resample_is_exact(self, grid):
        f = sample_field(grid, lambda x1, x2: np.sin(x1) + np.cos(3 * x2))
        fine = resample(f, Grid(nx=32, ny=32))
        expected = ScalarField.from_function(Grid(nx=32, ny=32), lambda x1, x2: np.sin(x1) + np.cos(3 * x2))
        np.testing.assert_allclose(fine.values, expected.values, atol=1e-12)
        back = resample(fine, grid)
        np.testing.assert_allclose(back.values, f.values, atol=1e-12)

    def test_dealias_and_top_band(self, grid):
        f = sample_field(grid, lambda x1, x2: np.cos(x1) + np.cos(7 * x1))
        assert top_band_energy_fraction(f) == pytest.approx(0.5)
        assert top_band_energy_fraction(dealias(f)) == 0.0

    def test_dealias_is_idempotent_and_never_adds_energy(self, grid, rng):
        f = ScalarField(grid, values=rng.standard_normal(grid.shape))
        once = dealias(f)
        assert once.norm() <= f.norm()
        np.testing.assert_allclose(dealias(once).values, once.values, atol=1e-12)

    def test_sobolev_norm_of_sine(self, grid):
        f = sample_field(grid, lambda x1, x2: np.sin(x1))
        assert sobolev_norm(f, 0) == pytest.approx(f.norm())
        assert sobolev_norm(f, 1) == pytest.approx(2.0 * math.pi)

    def test_remove_mean(self, grid):
        f = sample_field(grid, lambda x1, x2: 2.0 + np.sin(x1))
        assert abs(remove_mean(f).mean()) < 1e-15
