"""
Tests for the periodic field containers.

Validates:
- forward-normalized spectral coefficients
- Parseval and quadrature inner products
- pointwise tensor algebra and symmetric storage
"""
import math

import numpy as np
import pytest

from core.models.fields import ScalarField, TensorField2x2, VectorField
from core.models.grid import TORUS_AREA, Grid


class TestGrid:
    def test_rejects_odd_or_tiny_sizes(self):
        with pytest.raises(ValueError):
            Grid(nx=15, ny=16)
        with pytest.raises(ValueError):
            Grid(nx=4, ny=4)

    def test_wavenumbers_zero_nyquist_in_derivatives(self, grid):
        wn = grid.wavenumbers()
        assert wn.k1[8, 0] == -8
        assert wn.d1[8, 0] == 0.0
        assert wn.ksq[8, 0] == 64

    def test_dealias_mask_two_thirds(self, grid):
        mask = grid.wavenumbers().dealias_mask
        assert grid.max_resolved_wavenumber() == (5, 5)
        assert mask[5, 5]
        assert not mask[6, 0]

    def test_tables_are_read_only(self, grid):
        with pytest.raises(ValueError):
            grid.wavenumbers().ksq[0, 0] = 1.0


class TestScalarField:
    def test_constant_has_single_mean_mode(self, grid):
        f = ScalarField.constant(grid, 3.0)
        assert f.spectral[0, 0] == pytest.approx(3.0)
        assert np.abs(f.spectral).sum() == pytest.approx(3.0)

    def test_cosine_coefficients(self, grid):
        f = ScalarField.from_function(grid, lambda x1, x2: np.cos(x1))
        assert f.spectral[1, 0].real == pytest.approx(0.5)
        assert f.spectral[-1, 0].real == pytest.approx(0.5)

    def test_values_from_spectral(self, grid, rng):
        values = rng.standard_normal(grid.shape)
        f = ScalarField(grid, values=values)
        g = ScalarField.from_spectral(grid, f.spectral)
        np.testing.assert_allclose(g.values, values, atol=1e-13)

    def test_parseval(self, grid, rng):
        f = ScalarField(grid, values=rng.standard_normal(grid.shape))
        assert f.spectral_norm_squared() == pytest.approx(f.norm_squared(), rel=1e-12)

    def test_sine_norm(self, grid):
        f = ScalarField.from_function(grid, lambda x1, x2: np.sin(x1))
        assert f.norm_squared() == pytest.approx(TORUS_AREA / 2)
        assert f.integral() == pytest.approx(0.0, abs=1e-12)

    def test_arrays_are_frozen(self, grid):
        f = ScalarField.zeros(grid)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_mismatched_grids_rejected(self, grid):
        other = Grid(nx=32, ny=32)
        with pytest.raises(ValueError):
            ScalarField.zeros(grid) + ScalarField.zeros(other)

    def test_missing_views_rejected(self, grid):
        with pytest.raises(ValueError):
            ScalarField(grid)


class TestVectorAndTensor:
    def test_vector_norm(self, grid):
        one = ScalarField.constant(grid, 1.0)
        v = VectorField(one, one * 2.0)
        assert v.norm_squared() == pytest.approx(5.0 * TORUS_AREA)
        assert v.max_magnitude() == pytest.approx(math.sqrt(5.0))

    def test_symmetric_tensor_shares_off_diagonal(self, grid):
        A = TensorField2x2.isotropic(grid)
        assert A.symmetric
        assert A.t12 is A.t21
        assert len(A.entries()) == 3

    def test_isotropic_trace_and_det(self, grid):
        A = TensorField2x2.isotropic(grid)
        assert A.trace().max_abs() == pytest.approx(1.0)
        assert A.det().max_abs() == pytest.approx(0.25)
        assert A.max_spectral_norm() == pytest.approx(0.5)

    def test_double_dot_counts_both_off_diagonals(self, grid):
        one = ScalarField.constant(grid, 1.0)
        zero = ScalarField.zeros(grid)
        A = TensorField2x2.symmetric_from(zero, one, zero)
        assert A.double_dot(A).max() == pytest.approx(2.0)

    def test_transpose_of_general_tensor(self, grid):
        one = ScalarField.constant(grid, 1.0)
        zero = ScalarField.zeros(grid)
        t = TensorField2x2(zero, one, zero, zero)
        assert t.transpose().t21.max() == pytest.approx(1.0)
        assert not t.symmetric
