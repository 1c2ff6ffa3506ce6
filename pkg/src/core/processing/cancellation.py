"""Integration-by-parts splits of the stress work against vorticity.

Each split evaluates a left side by plain spectral quadrature, a dissipative quadratic
form and, independently, the commutator remainder in which at least one derivative
lands on A (or on the moments of f). All products are formed on a scratch grid fine
enough that every intermediate trigonometric polynomial is represented exactly, so
lhs = dissipative + remainder holds to round-off.

With κ_ij = ∂_j u_i and ω = ∂₁u₂ − ∂₂u₁ the identities are

    ∫ ω ∇⊥·(∇·σ)      = ∫ Δκ : σ
    ∫ (−Δω) ∇⊥·(∇·σ)  = −∫ Δκ : Δσ
"""
import logging
import math
from dataclasses import dataclass
from itertools import product as index_product

import numpy as np

from core.models.fields import ScalarField, TensorField2x2, VectorField
from core.models.grid import Grid
from core.models.moment_data import MomentTensor
from core.models.states import AngularDistribution
from core.processing.moments import moment_tensor
from core.processing.spectral import (
    divergence_tensor,
    gradient,
    laplacian,
    resample,
    resample_tensor,
    resample_vector,
    top_band_energy_fraction,
    velocity_gradient,
    vorticity,
)

logger = logging.getLogger(__name__)

CLOSURE_TOLERANCE = 1e-10
ALIASING_THRESHOLD = 1e-12
INDEX_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))


@dataclass(frozen=True)
class CancellationSplit:
    """lhs = dissipative + remainder, with ``remainder_direct`` evaluated on its own.

    Attributes:
        lhs: Stress work against ω (or −Δω).
        dissipative: Negative-semidefinite quadratic form.
        remainder: lhs − dissipative.
        remainder_direct: Commutator terms computed independently of lhs.
    """
    lhs: float
    dissipative: float
    remainder: float
    remainder_direct: float

    @property
    def closure_error(self) -> float:
        """|lhs − dissipative − remainder_direct| relative to the largest term."""
        scale = max(abs(self.lhs), abs(self.dissipative), abs(self.remainder_direct))
        if scale == 0.0:
            return 0.0
        return abs(self.lhs - self.dissipative - self.remainder_direct) / scale

    def closes(self, tolerance: float = CLOSURE_TOLERANCE) -> bool:
        return self.closure_error <= tolerance


def spectral_bandwidth(coefficients: np.ndarray, relative_tolerance: float = 1e-13) -> int:
    """Largest |k_i| carrying a coefficient above relative_tolerance·max over the last two axes."""
    magnitude = np.abs(coefficients)
    peak = float(magnitude.max()) if magnitude.size else 0.0
    if peak == 0.0:
        return 0
    active = magnitude > relative_tolerance * peak
    nx, ny = coefficients.shape[-2:]
    k1 = np.abs(np.fft.fftfreq(nx, d=1.0 / nx))[:, None]
    k2 = np.abs(np.fft.fftfreq(ny, d=1.0 / ny))[None, :]
    reach = np.broadcast_to(np.maximum(k1, k2), active.shape)
    return int(reach[active].max())


def scratch_grid(grid: Grid, degree: int) -> Grid:
    """Even grid on which trigonometric polynomials of the given degree multiply without aliasing."""
    size = max(grid.nx, grid.ny, 2 * degree + 2)
    size += size % 2
    return Grid(nx=size, ny=size, dealias_fraction=grid.dealias_fraction)


def _warn_if_aliased(label: str, fields: list[ScalarField]) -> None:
    worst = max(top_band_energy_fraction(f) for f in fields)
    if worst > ALIASING_THRESHOLD:
        logger.warning(f"{label}: fields occupy the top third of the spectrum (energy share {worst:.2e}), "
                       "solver products alias")


def _integral(values: np.ndarray, grid: Grid) -> float:
    return ScalarField(grid, values=values).integral()


def _velocity_terms(u: VectorField):
    kappa = velocity_gradient(u)
    return {ij: kappa.component(*ij) for ij in INDEX_PAIRS}


def _da_prepare(u: VectorField, A: TensorField2x2) -> tuple[VectorField, TensorField2x2, Grid]:
    _warn_if_aliased("DA split", [u.u1, u.u2, A.t11, A.t12, A.t22])
    k_u = max(spectral_bandwidth(u.u1.spectral), spectral_bandwidth(u.u2.spectral))
    k_a = max(spectral_bandwidth(a.spectral) for a in (A.t11, A.t12, A.t22))
    grid = scratch_grid(u.grid, k_u + 2 * k_a)
    return resample_vector(u, grid), resample_tensor(A, grid), grid


def _da_stress(kappa: dict, A: TensorField2x2, eta: float) -> tuple[np.ndarray, TensorField2x2]:
    grid = A.grid
    G = sum(kappa[ij].values * A.component(*ij).values for ij in INDEX_PAIRS)
    sigma = TensorField2x2.symmetric_from(
        ScalarField(grid, values=eta * G * A.t11.values),
        ScalarField(grid, values=eta * G * A.t12.values),
        ScalarField(grid, values=eta * G * A.t22.values),
    )
    return G, sigma


def cancellation_split_da(u: VectorField, A: TensorField2x2, eta: float) -> CancellationSplit:
    """∫ω∇⊥·(∇·σ) = −η∫|V|² + I for σ = η((∇u):A)A.

    V = Σ_ij A_ij ∇κ_ij and I = −η∫(V·d + cG) with d = Σ κ_ij ∇A_ij, c = Σ ∇A_ij·∇κ_ij.
    """
    u, A, grid = _da_prepare(u, A)
    kappa = _velocity_terms(u)
    G, sigma = _da_stress(kappa, A, eta)
    lhs = vorticity(u).inner(vorticity(divergence_tensor(sigma)))

    grad_kappa = {ij: gradient(kappa[ij]) for ij in INDEX_PAIRS}
    grad_a = {ij: gradient(A.component(*ij)) for ij in INDEX_PAIRS}
    V = [sum(A.component(*ij).values * grad_kappa[ij].components()[p].values for ij in INDEX_PAIRS) for p in (0, 1)]
    d = [sum(kappa[ij].values * grad_a[ij].components()[p].values for ij in INDEX_PAIRS) for p in (0, 1)]
    c = sum(grad_a[ij].u1.values * grad_kappa[ij].u1.values + grad_a[ij].u2.values * grad_kappa[ij].u2.values
            for ij in INDEX_PAIRS)

    dissipative = -eta * _integral(V[0] ** 2 + V[1] ** 2, grid)
    remainder_direct = -eta * _integral(V[0] * d[0] + V[1] * d[1] + c * G, grid)
    return CancellationSplit(lhs, dissipative, lhs - dissipative, remainder_direct)


def cancellation_split_da_high(u: VectorField, A: TensorField2x2, eta: float) -> CancellationSplit:
    """∫(−Δω)∇⊥·(∇·σ) = −η∫((∇Δu):A)² + I′.

    With G_Δ = Σ A_ij Δκ_ij and e = Σ(2∇A_ij·∇κ_ij + ΔA_ij κ_ij),
    I′ = −η∫[G_Δ e + Σ Δκ_ij(2∇A_ij·∇G + ΔA_ij G)].
    """
    u, A, grid = _da_prepare(u, A)
    kappa = _velocity_terms(u)
    G, sigma = _da_stress(kappa, A, eta)
    lhs = (-laplacian(vorticity(u))).inner(vorticity(divergence_tensor(sigma)))

    lap_kappa = {ij: laplacian(kappa[ij]).values for ij in INDEX_PAIRS}
    grad_kappa = {ij: gradient(kappa[ij]) for ij in INDEX_PAIRS}
    grad_a = {ij: gradient(A.component(*ij)) for ij in INDEX_PAIRS}
    lap_a = {ij: laplacian(A.component(*ij)).values for ij in INDEX_PAIRS}
    grad_g = gradient(ScalarField(grid, values=G))

    g_lap = sum(A.component(*ij).values * lap_kappa[ij] for ij in INDEX_PAIRS)
    e = sum(2.0 * (grad_a[ij].u1.values * grad_kappa[ij].u1.values + grad_a[ij].u2.values * grad_kappa[ij].u2.values)
            + lap_a[ij] * kappa[ij].values for ij in INDEX_PAIRS)
    tail = sum(lap_kappa[ij] * (2.0 * (grad_a[ij].u1.values * grad_g.u1.values + grad_a[ij].u2.values * grad_g.u2.values)
                                + lap_a[ij] * G) for ij in INDEX_PAIRS)

    dissipative = -eta * _integral(g_lap**2, grid)
    remainder_direct = -eta * _integral(g_lap * e + tail, grid)
    return CancellationSplit(lhs, dissipative, lhs - dissipative, remainder_direct)


def _doi_prepare(u: VectorField, f: AngularDistribution) -> tuple[VectorField, MomentTensor, Grid]:
    _warn_if_aliased("Doi split", [u.u1, u.u2, f.density()])
    k_u = max(spectral_bandwidth(u.u1.spectral), spectral_bandwidth(u.u2.spectral))
    moments = moment_tensor(f, 4)
    k_f = max(spectral_bandwidth(c.spectral) for _, c in moments.items())
    grid = scratch_grid(u.grid, k_u + k_f)
    padded = MomentTensor(4, {index: resample(value, grid) for index, value in moments.items()})
    return resample_vector(u, grid), padded, grid


def _viscous_stress_exact(kappa: dict, m4: MomentTensor, eta: float) -> TensorField2x2:
    grid = next(iter(kappa.values())).grid
    entries = {}
    for k, l in ((1, 1), (1, 2), (2, 2)):
        total = sum(kappa[(i, j)].values * m4.component(i, j, k, l).values for i, j in INDEX_PAIRS)
        entries[(k, l)] = ScalarField(grid, values=eta * total)
    return TensorField2x2.symmetric_from(entries[(1, 1)], entries[(1, 2)], entries[(2, 2)])


def _quadruples():
    return index_product(INDEX_PAIRS, repeat=2)


def cancellation_split_doi(u: VectorField, f: AngularDistribution, eta: float) -> CancellationSplit:
    """η∫ω∇⊥·(∇·σ_V) = −η∫∫|∇((∇u):m⊗m)|² f − η∫T₃.

    T₃ = Σ ∂_pκ_ij κ_kl ∂_pM₄^{ijkl}.
    """
    u, m4, grid = _doi_prepare(u, f)
    kappa = _velocity_terms(u)
    sigma = _viscous_stress_exact(kappa, m4, eta)
    lhs = vorticity(u).inner(vorticity(divergence_tensor(sigma)))

    grad_kappa = {ij: gradient(kappa[ij]) for ij in INDEX_PAIRS}
    quadratic = np.zeros(grid.shape)
    t3 = np.zeros(grid.shape)
    for ij, kl in _quadruples():
        weight = m4.component(*ij, *kl)
        grad_weight = gradient(weight)
        for p in (0, 1):
            dk = grad_kappa[ij].components()[p].values
            quadratic += dk * grad_kappa[kl].components()[p].values * weight.values
            t3 += dk * kappa[kl].values * grad_weight.components()[p].values

    dissipative = -eta * _integral(quadratic, grid)
    remainder_direct = -eta * _integral(t3, grid)
    return CancellationSplit(lhs, dissipative, lhs - dissipative, remainder_direct)


def cancellation_split_doi_high(u: VectorField, f: AngularDistribution, eta: float) -> CancellationSplit:
    """∫(−Δω)∇⊥·(∇·σ_V) = −η∫∫(Δ((∇u):m⊗m))² f − η∫(T₄ + T₅).

    T₄ = 2Σ Δκ_ij ∇κ_kl·∇M₄^{ijkl}, T₅ = Σ Δκ_ij κ_kl ΔM₄^{ijkl}.
    """
    u, m4, grid = _doi_prepare(u, f)
    kappa = _velocity_terms(u)
    sigma = _viscous_stress_exact(kappa, m4, eta)
    lhs = (-laplacian(vorticity(u))).inner(vorticity(divergence_tensor(sigma)))

    lap_kappa = {ij: laplacian(kappa[ij]).values for ij in INDEX_PAIRS}
    grad_kappa = {ij: gradient(kappa[ij]) for ij in INDEX_PAIRS}
    quadratic = np.zeros(grid.shape)
    t4 = np.zeros(grid.shape)
    t5 = np.zeros(grid.shape)
    for ij, kl in _quadruples():
        weight = m4.component(*ij, *kl)
        grad_weight = gradient(weight)
        quadratic += lap_kappa[ij] * lap_kappa[kl] * weight.values
        t4 += 2.0 * lap_kappa[ij] * (grad_kappa[kl].u1.values * grad_weight.u1.values
                                     + grad_kappa[kl].u2.values * grad_weight.u2.values)
        t5 += lap_kappa[ij] * kappa[kl].values * laplacian(weight).values

    dissipative = -eta * _integral(quadratic, grid)
    remainder_direct = -eta * _integral(t4 + t5, grid)
    return CancellationSplit(lhs, dissipative, lhs - dissipative, remainder_direct)


def remainder_slope(epsilons: list[float], remainders: list[float]) -> float:
    """Log-log slope of |remainder| against ε."""
    x = np.log(np.asarray(epsilons, dtype=float))
    y = np.log(np.abs(np.asarray(remainders, dtype=float)))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope) if math.isfinite(slope) else math.nan
