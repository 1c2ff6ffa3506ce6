"""Angular moments of the orientation density, polymer stresses, moment equations and
Toeplitz realizability.

Convention: s_j = ∫ e^{−ijθ} f dθ = 2π ĉ_j, and moments use m(θ) = (cos θ, sin θ).
"""
import logging
from dataclasses import dataclass
from itertools import product as index_product
from typing import Optional, Sequence, Union

import numpy as np

from core.errors import InsufficientDataError
from core.models.fields import ScalarField, TensorField2x2
from core.models.grid import TWO_PI
from core.models.moment_data import MomentTensor, TrigMomentSequence, multi_index
from core.models.states import AngularDistribution, DoiParams, DoiState
from core.processing.moment_tables import drift_table, moment_weights, theta_diffusion_table
from core.processing.spectral import advect, dealias, laplacian, velocity_gradient

logger = logging.getLogger(__name__)

DEFAULT_PSD_TOLERANCE = 1e-8


def trig_moments(f: AngularDistribution, J: Optional[int] = None) -> TrigMomentSequence:
    """s_j for j = 0..J (default f.J)."""
    J = f.J if J is None else J
    if J > f.J:
        raise InsufficientDataError(f"requested {J} trigonometric moments from a distribution with J={f.J}")
    return TrigMomentSequence(f.grid, TWO_PI * f.coefficients[: J + 1])


def moment_values(s: TrigMomentSequence, p: int, q: int) -> np.ndarray:
    """∫ cos^pθ sin^qθ f dθ on the grid."""
    if p + q > s.J:
        raise InsufficientDataError(f"moment of order {p + q} needs {p + q} angular modes, have {s.J}")
    total = np.zeros(s.grid.shape)
    for weight in moment_weights(p, q):
        mode = s.s[weight.m]
        if weight.re:
            total = total + float(weight.re) * mode.real
        if weight.im:
            total = total + float(weight.im) * mode.imag
    return total


def moment_tensor(f: Union[AngularDistribution, TrigMomentSequence], n: int) -> MomentTensor:
    """Order-n moment tensor M_n.

    Raises:
        InsufficientDataError: if n exceeds the number of stored angular modes.
    """
    s = f if isinstance(f, TrigMomentSequence) else trig_moments(f)
    if n > s.J:
        raise InsufficientDataError(f"moment of order {n} needs J >= {n}, have J={s.J}")
    components = {
        multi_index(p, n - p): ScalarField(s.grid, values=moment_values(s, p, n - p))
        for p in range(n, -1, -1)
    }
    return MomentTensor(n, components)


def moment_bound_violation(f: AngularDistribution, n: int) -> float:
    """max over components and x of |M_n^I| − M₀; non-positive when the bound holds."""
    s = trig_moments(f)
    m0 = s.s0
    return max(float((np.abs(moment_values(s, p, n - p)) - m0).max()) for p in range(n + 1))


def elastic_stress(f: AngularDistribution) -> TensorField2x2:
    """σ_E = 2∫(m⊗m − ½I) f dθ = [[Re s₂, −Im s₂], [−Im s₂, −Re s₂]]."""
    if f.J < 2:
        raise InsufficientDataError(f"elastic stress needs J >= 2, have J={f.J}")
    s2 = TWO_PI * f.coefficients[2]
    diagonal = ScalarField(f.grid, values=s2.real)
    return TensorField2x2.symmetric_from(diagonal, ScalarField(f.grid, values=-s2.imag), -diagonal)


def viscous_stress(f: AngularDistribution, gradu: TensorField2x2, eta: float, dealiased: bool = True,
                   m4: Optional[MomentTensor] = None) -> TensorField2x2:
    """σ_V^{kl} = η Σ_ij κ_ij M₄^{ijkl} with κ_ij = ∂_j u_i.

    With ``dealiased=False`` the contraction is pointwise, which is what a θ-quadrature at
    each grid point reproduces.
    """
    if f.J < 4:
        raise InsufficientDataError(f"viscous stress needs J >= 4, have J={f.J}")
    if eta == 0.0:
        return TensorField2x2.zeros(f.grid)
    m4 = moment_tensor(f, 4) if m4 is None else m4
    entries = {}
    for k, l in ((1, 1), (1, 2), (2, 2)):
        total = None
        for i, j in index_product((1, 2), repeat=2):
            term = gradu.component(i, j) * m4.component(i, j, k, l)
            total = term if total is None else total + term
        entries[(k, l)] = (dealias(total) if dealiased else total) * eta
    return TensorField2x2.symmetric_from(entries[(1, 1)], entries[(1, 2)], entries[(2, 2)])


@dataclass(frozen=True)
class ToeplitzReport:
    """Pointwise minimum Toeplitz eigenvalue and the realizability verdict."""
    min_eigenvalue: ScalarField
    ok: bool
    violation_count: int
    worst_relative: float


def toeplitz_matrices(s: TrigMomentSequence, J: Optional[int] = None) -> np.ndarray:
    """Per-point Hermitian Toeplitz matrices [s_{j−k}], shape (nx, ny, J+1, J+1)."""
    J = s.J if J is None else J
    if J > s.J:
        raise InsufficientDataError(f"Toeplitz order {J} needs {J} moments, have {s.J}")
    extended = np.concatenate([np.conj(s.s[J:0:-1]), s.s[: J + 1]])
    offsets = np.arange(J + 1)[:, None] - np.arange(J + 1)[None, :] + J
    return np.moveaxis(extended[offsets], (0, 1), (-2, -1))


def toeplitz_realizability(s: TrigMomentSequence, J: Optional[int] = None,
                           psd_tol: float = DEFAULT_PSD_TOLERANCE) -> ToeplitzReport:
    """Minimum eigenvalue of [s_{j−k}] at every point; ok iff it is ≥ −psd_tol·s₀ everywhere."""
    eigenvalues = np.linalg.eigvalsh(toeplitz_matrices(s, J))
    minimum = eigenvalues[..., 0]
    scale = np.maximum(np.abs(s.s0), np.finfo(float).tiny)
    violations = minimum < -psd_tol * scale
    count = int(violations.sum())
    if count:
        logger.warning(f"Toeplitz realizability fails at {count} grid points (min eigenvalue {minimum.min():.3e})")
    return ToeplitzReport(
        min_eigenvalue=ScalarField(s.grid, values=minimum),
        ok=count == 0,
        violation_count=count,
        worst_relative=float((minimum / scale).min()),
    )


def moment_evolution_rhs(state: DoiState, n: int, params: DoiParams) -> MomentTensor:
    """Right side of ∂_t M_n = −u·∇M_n + k T1_n M_n + νΔM_n + T2_n(∇u, M_{n+2})."""
    if n + 2 > state.J:
        raise InsufficientDataError(f"moment equation of order {n} needs J >= {n + 2}, have J={state.J}")
    s = trig_moments(state.f)
    current = moment_tensor(s, n)
    higher = moment_tensor(s, n + 2)
    kappa = velocity_gradient(state.u)
    components = {}
    for index, value in current.items():
        p, q = index.count(1), index.count(2)
        rhs = laplacian(value) * params.nu - advect(state.u, value)
        for term in theta_diffusion_table(p, q):
            rhs = rhs + current.by_exponents(term.p, term.q) * (params.k * term.coefficient)
        drift = None
        for term in drift_table(p, q):
            piece = kappa.component(term.i, term.j) * higher.by_exponents(term.p, term.q) * float(term.coefficient)
            drift = piece if drift is None else drift + piece
        if drift is not None:
            rhs = rhs + dealias(drift)
        components[index] = rhs
    return MomentTensor(n, components)


def elastic_stress_evolution(state: DoiState, params: DoiParams) -> TensorField2x2:
    """∂_t σ_E implied by the order-0 and order-2 moment equations."""
    rhs0 = moment_evolution_rhs(state, 0, params).components[()]
    rhs2 = moment_evolution_rhs(state, 2, params)
    return TensorField2x2.symmetric_from(
        rhs2.by_exponents(2, 0) * 2.0 - rhs0,
        rhs2.by_exponents(1, 1) * 2.0,
        rhs2.by_exponents(0, 2) * 2.0 - rhs0,
    )


@dataclass(frozen=True)
class MomentResidual:
    """Max residual over components of the order-n moment equation at the middle state."""
    n: int
    t: float
    max_abs: float
    per_component: dict[tuple[int, ...], float]


def moment_evolution_residual(history: Sequence[DoiState], n: int, params: DoiParams) -> MomentResidual:
    """Centered-difference residual of the order-n moment equation from the last three states.

    Raises:
        InsufficientDataError: with fewer than three states or too few angular modes.
    """
    states = list(history)[-3:]
    if len(states) < 3:
        raise InsufficientDataError(f"moment residual needs 3 states, got {len(states)}")
    if n % 2:
        raise InsufficientDataError(f"moment residual is defined for even orders, got {n}")
    before, middle, after = states
    rhs = moment_evolution_rhs(middle, n, params)
    m_before = moment_tensor(before.f, n)
    m_after = moment_tensor(after.f, n)
    span = after.t - before.t
    per_component = {}
    for index, value in rhs.items():
        rate = (m_after.components[index] - m_before.components[index]) * (1.0 / span)
        per_component[index] = (rate - value).max_abs()
    return MomentResidual(n, middle.t, max(per_component.values()), per_component)
