"""Spectral calculus on the periodic grid.

Derivatives multiply by i·d with the Nyquist entry of d set to zero, so the discrete
divergence of a Leray-projected field vanishes exactly. The Laplacian uses the full
|k|² symbol. Products are formed in real space and dealiased by the grid's mask.
"""
import logging
from functools import lru_cache
from typing import Optional

import numpy as np

from core.errors import GaugeError
from core.models.fields import ScalarField, TensorField2x2, VectorField
from core.models.grid import TORUS_AREA, Grid

logger = logging.getLogger(__name__)

GAUGE_TOLERANCE = 1e-10


def transform_forward(f: ScalarField) -> np.ndarray:
    """Spectral coefficients of f (``norm="forward"``, so Parseval reads ‖f‖² = |𝕋²| Σ|f̂|²)."""
    return f.spectral


def transform_inverse(grid: Grid, coefficients: np.ndarray) -> ScalarField:
    return ScalarField.from_spectral(grid, coefficients)


def partial(f: ScalarField, axis: int) -> ScalarField:
    """∂₁ (axis=1) or ∂₂ (axis=2)."""
    wn = f.grid.wavenumbers()
    d = wn.d1 if axis == 1 else wn.d2
    return ScalarField.from_spectral(f.grid, 1j * d * f.spectral)


def gradient(f: ScalarField) -> VectorField:
    return VectorField(partial(f, 1), partial(f, 2))


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField.from_spectral(f.grid, -f.grid.wavenumbers().ksq * f.spectral)


def divergence(v: VectorField) -> ScalarField:
    wn = v.grid.wavenumbers()
    return ScalarField.from_spectral(v.grid, 1j * (wn.d1 * v.u1.spectral + wn.d2 * v.u2.spectral))


def vorticity(u: VectorField) -> ScalarField:
    """ω = ∂₁u₂ − ∂₂u₁. Also serves as ∇⊥·v for any vector field v."""
    wn = u.grid.wavenumbers()
    return ScalarField.from_spectral(u.grid, 1j * (wn.d1 * u.u2.spectral - wn.d2 * u.u1.spectral))


def leray_project_hat(grid: Grid, v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Leray projection on spectral arrays; modes with d = 0 pass through."""
    wn = grid.wavenumbers()
    safe = np.where(wn.dsq > 0, wn.dsq, 1.0)
    weight = np.where(wn.dsq > 0, (wn.d1 * v1 + wn.d2 * v2) / safe, 0.0)
    return v1 - wn.d1 * weight, v2 - wn.d2 * weight


def leray_project(v: VectorField) -> VectorField:
    """Orthogonal projection onto divergence-free fields."""
    p1, p2 = leray_project_hat(v.grid, v.u1.spectral, v.u2.spectral)
    return VectorField(ScalarField.from_spectral(v.grid, p1), ScalarField.from_spectral(v.grid, p2))


def dealias(f: ScalarField, fraction: Optional[float] = None) -> ScalarField:
    """Zero every mode with |k_i| > fraction·n_i/2 (grid default fraction if None)."""
    wn = f.grid.wavenumbers()
    mask = wn.dealias_mask if fraction is None else wn.mask_for(fraction)
    return ScalarField.from_spectral(f.grid, np.where(mask, f.spectral, 0.0))


def product(a: ScalarField, b: ScalarField, fraction: Optional[float] = None) -> ScalarField:
    """Dealiased pointwise product."""
    return dealias(a * b, fraction)


def remove_mean(f: ScalarField) -> ScalarField:
    coefficients = np.array(f.spectral)
    coefficients[0, 0] = 0.0
    return ScalarField.from_spectral(f.grid, coefficients)


def remove_mean_vector(v: VectorField) -> VectorField:
    return VectorField(remove_mean(v.u1), remove_mean(v.u2))


@lru_cache(maxsize=32)
def galerkin_eigenvalues(nx: int, ny: int) -> tuple[int, ...]:
    """Sorted distinct Laplacian eigenvalues |k|² present on an nx×ny grid, starting at 0."""
    k1 = np.fft.fftfreq(nx, d=1.0 / nx)
    k2 = np.fft.fftfreq(ny, d=1.0 / ny)
    ksq = (k1[:, None] ** 2 + k2[None, :] ** 2).astype(np.int64)
    return tuple(int(v) for v in np.unique(ksq))


def galerkin_cutoff(grid: Grid, ell: int) -> tuple[float, bool]:
    """Eigenvalue threshold for index ell and whether the index ran past the grid.

    Index 0 is the zero eigenvalue, so ell = 1 keeps |k|² ≤ 1 and ell = 2 keeps |k|² ≤ 2.
    A saturated cutoff retains every resolved mode.
    """
    if ell < 1:
        raise ValueError(f"galerkin_ell must be >= 1, got {ell}")
    eigenvalues = galerkin_eigenvalues(grid.nx, grid.ny)
    if ell >= len(eigenvalues):
        return float(eigenvalues[-1]), True
    return float(eigenvalues[ell]), False


def galerkin_mask(grid: Grid, ell: int) -> tuple[np.ndarray, bool]:
    threshold, saturated = galerkin_cutoff(grid, ell)
    if saturated:
        logger.warning(f"Galerkin index {ell} exceeds the {grid.nx}x{grid.ny} grid, projection is the identity")
    return grid.wavenumbers().ksq <= threshold + 1e-9, saturated


def galerkin_mask_for(grid: Grid, ell: Optional[int]) -> Optional[np.ndarray]:
    """Shell mask for an optional cutoff; None leaves every mode."""
    return None if ell is None else galerkin_mask(grid, ell)[0]


def apply_mask(f: ScalarField, mask: Optional[np.ndarray]) -> ScalarField:
    if mask is None:
        return f
    return ScalarField.from_spectral(f.grid, np.where(mask, f.spectral, 0.0))


def galerkin_project(f: ScalarField, ell: int) -> ScalarField:
    """Keep modes with |k|² at or below the ell-th distinct eigenvalue."""
    mask, _ = galerkin_mask(f.grid, ell)
    return apply_mask(f, mask)


def stream_function(omega: ScalarField, tolerance: float = GAUGE_TOLERANCE) -> ScalarField:
    """ψ with Δψ = ω and zero mean.

    The inverse divides by d₁² + d₂², the symbol of :func:`partial` with the Nyquist entry
    zeroed, so ``vorticity(velocity_from_vorticity(ω)) == ω`` on every mode where that symbol
    is nonzero. The modes (n/2, 0), (0, n/2) and (n/2, n/2) are not the curl of any
    discrete velocity and are dropped.

    Raises:
        GaugeError: if ω has a nonzero mean.
    """
    scale = max(1.0, omega.max_abs())
    if abs(omega.mean()) > tolerance * scale:
        raise GaugeError(f"vorticity mean {omega.mean():.3e} is not zero")
    wn = omega.grid.wavenumbers()
    psi = np.where(wn.dsq > 0, -omega.spectral / np.where(wn.dsq > 0, wn.dsq, 1.0), 0.0)
    return ScalarField.from_spectral(omega.grid, psi)


def velocity_from_vorticity(omega: ScalarField, tolerance: float = GAUGE_TOLERANCE) -> VectorField:
    """u = (−∂₂ψ, ∂₁ψ) for the mean-free stream function of ω."""
    psi = stream_function(omega, tolerance)
    return VectorField(-partial(psi, 2), partial(psi, 1))


def velocity_gradient(u: VectorField) -> TensorField2x2:
    """κ with κ_ij = ∂_j u_i, so (∇u)m is the rate at which the direction m is stretched."""
    return TensorField2x2(partial(u.u1, 1), partial(u.u1, 2), partial(u.u2, 1), partial(u.u2, 2))


def divergence_tensor(sigma: TensorField2x2) -> VectorField:
    """(∇·σ)_i = Σ_j ∂_j σ_ij."""
    return VectorField(
        partial(sigma.t11, 1) + partial(sigma.t12, 2),
        partial(sigma.t21, 1) + partial(sigma.t22, 2),
    )


def advect(u: VectorField, f: ScalarField, fraction: Optional[float] = None) -> ScalarField:
    """Dealiased u·∇f."""
    return dealias(u.u1 * partial(f, 1) + u.u2 * partial(f, 2), fraction)


def advect_vector(u: VectorField, v: VectorField, fraction: Optional[float] = None) -> VectorField:
    return VectorField(advect(u, v.u1, fraction), advect(u, v.u2, fraction))


def _shared_modes(n_from: int, n_to: int) -> tuple[np.ndarray, np.ndarray]:
    half = min(n_from, n_to) // 2
    k = np.arange(-half + 1, half)
    return k % n_from, k % n_to


def resample(f: ScalarField, grid: Grid) -> ScalarField:
    """Move f to another grid by zero-padding or truncating its spectrum.

    Modes at or above the smaller grid's Nyquist are dropped, so band-limited fields
    move without change.
    """
    if grid == f.grid:
        return f
    src1, dst1 = _shared_modes(f.grid.nx, grid.nx)
    src2, dst2 = _shared_modes(f.grid.ny, grid.ny)
    coefficients = np.zeros(grid.shape, dtype=np.complex128)
    coefficients[np.ix_(dst1, dst2)] = f.spectral[np.ix_(src1, src2)]
    return ScalarField.from_spectral(grid, coefficients)


def resample_vector(v: VectorField, grid: Grid) -> VectorField:
    return VectorField(resample(v.u1, grid), resample(v.u2, grid))


def resample_tensor(t: TensorField2x2, grid: Grid) -> TensorField2x2:
    return t.map(lambda entry: resample(entry, grid))


def top_band_energy_fraction(f: ScalarField) -> float:
    """Share of ‖f‖² carried by modes the dealiasing mask removes."""
    power = np.abs(f.spectral) ** 2
    total = float(power.sum())
    if total == 0.0:
        return 0.0
    return float(power[~f.grid.wavenumbers().dealias_mask].sum()) / total


def velocity_gradient_norm_squared(u: VectorField) -> float:
    """‖∇u‖²."""
    return sum(gradient(c).norm_squared() for c in u.components())


def sobolev_norm(f: ScalarField, order: int) -> float:
    """‖f‖_{W^{s,2}} = (Σ_{|α|≤s} ‖∂^α f‖²)^{1/2}, counting mixed derivatives in every order."""
    ksq = f.grid.wavenumbers().ksq
    weight = sum(ksq**m for m in range(order + 1))
    return float(np.sqrt(TORUS_AREA * np.sum(weight * np.abs(f.spectral) ** 2)))
