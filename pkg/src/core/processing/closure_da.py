"""DA closure: Navier-Stokes with the stress σ = η((∇u):A)A coupled to the
conformation tensor equation

    ∂_t A + u·∇A = (∇u)A + A(∇u)ᵀ − 2((∇u):A)A − 2k(2A − I) + νΔA.

The scalar G = (∇u):A is dealiased once and reused in every cubic product, which
keeps Tr A ≡ 1 exactly at the discrete level.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from core.errors import BlowupError, InsufficientDataError, StabilityError
from core.models.fields import ScalarField, TensorField2x2, VectorField, fft2, ifft2
from core.models.grid import TWO_PI, Grid
from core.models.model_enum import StressDealias, TimeScheme
from core.models.states import DAParams, DAState
from core.processing.imex import IMEXStepper
from core.processing.spectral import (
    advect,
    advect_vector,
    apply_mask,
    dealias,
    divergence_tensor,
    galerkin_mask,
    galerkin_mask_for,
    gradient,
    laplacian,
    leray_project,
    leray_project_hat,
    velocity_gradient,
    velocity_gradient_norm_squared,
)

logger = logging.getLogger(__name__)

DA_FIELD_NAMES = ("u1", "u2", "A11", "A12", "A22")


def stress_invariant(gradu: TensorField2x2, A: TensorField2x2) -> ScalarField:
    """G = (∇u):A, dealiased."""
    return dealias(gradu.double_dot(A))


def da_stress_from_gradient(gradu: TensorField2x2, A: TensorField2x2, eta: float,
                            stress_dealias: StressDealias = StressDealias.TWO_THIRDS,
                            galerkin: Optional[np.ndarray] = None) -> TensorField2x2:
    """σ = η G A from a given velocity gradient.

    With a Galerkin mask 𝒥 the stress is 𝒥(η(𝒥(∇u):A)A); A itself is not truncated.
    """
    if eta == 0.0:
        return TensorField2x2.zeros(A.grid)
    if galerkin is not None:
        gradu = gradu.map(lambda entry: apply_mask(entry, galerkin))
    G = stress_invariant(gradu, A)
    fraction = stress_dealias.fraction
    return TensorField2x2.symmetric_from(
        apply_mask(dealias(G * A.t11, fraction) * eta, galerkin),
        apply_mask(dealias(G * A.t12, fraction) * eta, galerkin),
        apply_mask(dealias(G * A.t22, fraction) * eta, galerkin),
    )


def da_viscous_stress(u: VectorField, A: TensorField2x2, eta: float,
                      stress_dealias: StressDealias = StressDealias.TWO_THIRDS,
                      galerkin: Optional[np.ndarray] = None) -> TensorField2x2:
    """σ = η((∇u):A)A, dealiased and symmetric."""
    return da_stress_from_gradient(velocity_gradient(u), A, eta, stress_dealias, galerkin)


def _tensor_explicit(u: VectorField, A: TensorField2x2, k: float, include_advection: bool = True) -> TensorField2x2:
    """(∇u)A + A(∇u)ᵀ − 2GA + 2kI − u·∇A."""
    kappa = velocity_gradient(u)
    G = stress_invariant(kappa, A)
    k11, k12, k21, k22 = kappa.t11, kappa.t12, kappa.t21, kappa.t22
    a11, a12, a22 = A.t11, A.t12, A.t22
    s11 = dealias(k11 * a11 + k12 * a12) * 2.0 - dealias(G * a11) * 2.0 + 2.0 * k
    s22 = dealias(k21 * a12 + k22 * a22) * 2.0 - dealias(G * a22) * 2.0 + 2.0 * k
    s12 = dealias(k11 * a12 + k12 * a22 + k21 * a11 + k22 * a12) - dealias(G * a12) * 2.0
    if include_advection:
        s11 = s11 - advect(u, a11)
        s12 = s12 - advect(u, a12)
        s22 = s22 - advect(u, a22)
    return TensorField2x2.symmetric_from(s11, s12, s22)


def da_tensor_rhs(state: DAState, params: DAParams, include_advection: bool = True) -> TensorField2x2:
    """Right side of the A equation.

    With ``include_advection=False`` the trace of the result equals
    2(G + 2k)(1 − Tr A) + νΔ Tr A.
    """
    explicit = _tensor_explicit(state.u, state.A, params.k, include_advection)
    linear = state.A.map(lambda a: laplacian(a) * params.nu - a * (4.0 * params.k))
    return explicit + linear


def _velocity_explicit(u: VectorField, A: TensorField2x2, params: DAParams,
                       galerkin: Optional[np.ndarray] = None) -> VectorField:
    forcing = -advect_vector(u, u)
    if params.eta != 0.0:
        sigma = da_viscous_stress(u, A, params.eta, params.stress_dealias, galerkin)
        forcing = forcing + divergence_tensor(sigma)
    return leray_project(forcing)


def da_velocity_rhs(state: DAState, params: DAParams) -> VectorField:
    """ℙ(−u·∇u + ∇·σ) + Δu, with σ regularized when ``galerkin_ell`` is set."""
    explicit = _velocity_explicit(state.u, state.A, params, galerkin_mask_for(state.grid, params.galerkin_ell))
    return explicit + VectorField(laplacian(state.u.u1), laplacian(state.u.u2))


def conformation_bounds(A: TensorField2x2) -> tuple[float, float]:
    """(max_x ‖A‖₂, max_x ‖A − ½Tr A·I‖₂) for a symmetric tensor field."""
    half_trace = 0.5 * (A.t11.values + A.t22.values)
    deviator = np.sqrt((0.5 * (A.t11.values - A.t22.values)) ** 2 + A.t12.values ** 2)
    return float((np.abs(half_trace) + deviator).max()), float(deviator.max())


def cfl_limit(u: VectorField, A: TensorField2x2, params: DAParams) -> float:
    """Largest stable dt for the explicit advection and stress terms, scaled by cfl_safety."""
    grid = u.grid
    limits = []
    speed = u.max_magnitude()
    if speed > 0.0:
        limits.append(min(TWO_PI / grid.nx, TWO_PI / grid.ny) / speed)
    norm, deviator = conformation_bounds(A)
    kmax = max(grid.max_resolved_wavenumber())
    stiffness = params.eta * norm * deviator * kmax**2
    if stiffness > 0.0:
        limits.append(1.0 / stiffness)
    return params.cfl_safety * min(limits) if limits else math.inf


@dataclass(frozen=True)
class ConformationStructure:
    """Pointwise structure of A: trace, determinant, norm and the |A|² = 1 − 2 det A defect."""
    max_trace_dev: float
    min_det: float
    max_det: float
    max_norm: float
    frobenius_defect: float


def conformation_structure(A: TensorField2x2) -> ConformationStructure:
    trace = A.t11.values + A.t22.values
    det = A.det().values
    frobenius = A.frobenius_squared().values
    norm, _ = conformation_bounds(A)
    return ConformationStructure(
        max_trace_dev=float(np.abs(trace - 1.0).max()),
        min_det=float(det.min()),
        max_det=float(det.max()),
        max_norm=norm,
        frobenius_defect=float(np.abs(frobenius - (1.0 - 2.0 * det)).max()),
    )


class DAIntegrator:
    """Steps DA states with Crank-Nicolson on Δu, νΔA − 4kA and explicit advection and stress."""

    def __init__(self, grid: Grid, params: DAParams):
        self.grid = grid
        self.params = params
        wn = grid.wavenumbers()
        relax = -params.nu * wn.ksq - 4.0 * params.k
        symbol = np.stack([-wn.ksq, -wn.ksq, relax, relax, relax])
        self.stepper = IMEXStepper(symbol, params.dt, params.scheme)
        self.galerkin: Optional[np.ndarray] = None
        self.galerkin_saturated = False
        if params.galerkin_ell is not None:
            self.galerkin, self.galerkin_saturated = galerkin_mask(grid, params.galerkin_ell)

    def _fields(self, stack_hat: np.ndarray) -> tuple[VectorField, TensorField2x2]:
        f = [ScalarField.from_spectral(self.grid, stack_hat[i]) for i in range(5)]
        return VectorField(f[0], f[1]), TensorField2x2.symmetric_from(f[2], f[3], f[4])

    def explicit(self, stack_hat: np.ndarray) -> np.ndarray:
        u, A = self._fields(stack_hat)
        nu_ = _velocity_explicit(u, A, self.params, self.galerkin)
        nA = _tensor_explicit(u, A, self.params.k)
        return np.stack([nu_.u1.spectral, nu_.u2.spectral, nA.t11.spectral, nA.t12.spectral, nA.t22.spectral])

    def constrain(self, stack_hat: np.ndarray) -> np.ndarray:
        """Re-project u, zero its mean and apply the Galerkin cutoff to u only."""
        out = np.array(stack_hat)
        out[0], out[1] = leray_project_hat(self.grid, out[0], out[1])
        out[0:2, 0, 0] = 0.0
        if self.galerkin is not None:
            out[0:2] = np.where(self.galerkin, out[0:2], 0.0)
        return out

    def check_stability(self, state: DAState) -> float:
        limit = cfl_limit(state.u, state.A, self.params)
        if self.params.dt > limit:
            message = f"dt={self.params.dt:.3e} exceeds the stability bound {limit:.3e} at t={state.t:.4f}"
            if self.params.enforce_stability:
                raise StabilityError(message)
            logger.warning(message)
        return limit

    def step(self, state: DAState) -> DAState:
        self.check_stability(state)
        state_hat = fft2(state.pack())
        explicit_now = self.explicit(state_hat)
        explicit_previous = None
        if self.params.scheme is TimeScheme.CNAB2 and state.tendency is not None:
            explicit_previous = fft2(state.tendency)
        new_hat = self.stepper.advance(state_hat, self.explicit, explicit_now, explicit_previous, self.constrain)
        data = np.ascontiguousarray(ifft2(self.constrain(new_hat)).real)
        step = state.step + 1
        for name, values in zip(DA_FIELD_NAMES, data):
            if not np.all(np.isfinite(values)):
                logger.error(f"Blowup in {name} at step {step} (t={state.t + self.params.dt:.4f})")
                raise BlowupError(step, name)
        tendency = None
        if self.params.scheme is TimeScheme.CNAB2:
            tendency = np.ascontiguousarray(ifft2(explicit_now).real)
        new_state = DAState.unpack(self.grid, data, state.t + self.params.dt, step, tendency)
        drift = float(np.abs(data[2] + data[4] - 1.0).max())
        if drift > self.params.tol_trace:
            logger.warning(f"Trace drift {drift:.3e} exceeds tol_trace at step {step}")
        return new_state


def step_da(state: DAState, params: DAParams) -> DAState:
    """Advance one step; builds a throwaway integrator, so loops should reuse :class:`DAIntegrator`."""
    return DAIntegrator(state.grid, params).step(state)


@dataclass(frozen=True)
class EnergyBudget:
    """Energy-budget residual at every interior stored time."""
    times: np.ndarray
    residuals: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.residuals).max()) if self.residuals.size else 0.0


def da_energy_budget(history: Sequence[DAState], params: DAParams) -> EnergyBudget:
    """r = d/dt(½‖u‖²) + ‖∇u‖² + η‖(∇u):A‖² with centered time differences.

    Raises:
        InsufficientDataError: with fewer than three states.
    """
    states = list(history)
    if len(states) < 3:
        raise InsufficientDataError(f"energy budget needs at least 3 states, got {len(states)}")
    energies = [0.5 * s.u.norm_squared() for s in states]
    times, residuals = [], []
    for n in range(1, len(states) - 1):
        middle = states[n]
        rate = (energies[n + 1] - energies[n - 1]) / (states[n + 1].t - states[n - 1].t)
        G = stress_invariant(velocity_gradient(middle.u), middle.A)
        residuals.append(rate + velocity_gradient_norm_squared(middle.u) + params.eta * G.norm_squared())
        times.append(middle.t)
    return EnergyBudget(np.array(times), np.array(residuals))


@dataclass(frozen=True)
class DetResidual:
    """Pointwise residual of the determinant identity at the middle of three states."""
    residual: ScalarField
    min_det: float
    min_source: float
    t: float


def det_evolution_rhs(state: DAState, params: DAParams) -> tuple[ScalarField, ScalarField]:
    """(right side of (∂_t + u·∇) det A, source term 2k + 2ν|∇A₁₁|² + 2ν|∇A₁₂|²)."""
    u, A = state.u, state.A
    det = dealias(A.det())
    G = stress_invariant(velocity_gradient(u), A)
    g11 = gradient(A.t11)
    g12 = gradient(A.t12)
    source = dealias(g11.dot(g11) + g12.dot(g12)) * (2.0 * params.nu) + 2.0 * params.k
    rhs = dealias((G + 2.0 * params.k) * det) * (-4.0) + laplacian(det) * params.nu + source
    return rhs, source


def det_evolution_residual(history: Sequence[DAState], params: DAParams) -> DetResidual:
    """Residual of ∂_t det A + u·∇det A − RHS from the last three states.

    Raises:
        InsufficientDataError: with fewer than three states.
    """
    states = list(history)[-3:]
    if len(states) < 3:
        raise InsufficientDataError(f"determinant identity needs 3 states, got {len(states)}")
    before, middle, after = states
    rate = (dealias(after.A.det()) - dealias(before.A.det())) * (1.0 / (after.t - before.t))
    rhs, source = det_evolution_rhs(middle, params)
    residual = rate + advect(middle.u, dealias(middle.A.det())) - rhs
    return DetResidual(residual, middle.A.det().min(), source.min(), middle.t)
