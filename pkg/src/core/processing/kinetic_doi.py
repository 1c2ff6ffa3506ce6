"""Kinetic Doi model: Fokker-Planck equation for f(x, θ, t) in θ-Fourier modes coupled
to Navier-Stokes through σ = σ_E + σ_V.

In angle form the drift is h(θ) = m⊥·((∇u)m) = a cos 2θ + b + c sin 2θ, so for each mode

    ∂_t ĉ_j = −u·∇ĉ_j − k j² ĉ_j + νΔĉ_j − ij [b ĉ_j + ½(a − ic) ĉ_{j−2} + ½(a + ic) ĉ_{j+2}]

with ĉ_{−m} = conj(ĉ_m) and couplings to |j| > J dropped.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import BlowupError, PositivityError, StabilityError
from core.models.fields import ScalarField, TensorField2x2, VectorField, fft2, ifft2
from core.models.grid import TORUS_AREA, TWO_PI, Grid
from core.models.model_enum import TimeScheme
from core.models.states import DEFAULT_THETA_POINTS, AngularDistribution, DoiParams, DoiState
from core.processing.imex import IMEXStepper
from core.processing.moments import elastic_stress, moment_tensor, viscous_stress
from core.processing.spectral import (
    advect_vector,
    apply_mask,
    divergence_tensor,
    galerkin_mask,
    galerkin_mask_for,
    laplacian,
    leray_project,
    leray_project_hat,
    velocity_gradient,
    velocity_gradient_norm_squared,
)

logger = logging.getLogger(__name__)


def fp_drift_coefficients(gradu: TensorField2x2) -> tuple[ScalarField, ScalarField, ScalarField]:
    """(a, b, c) with m⊥·((∇u)m) = a cos 2θ + b + c sin 2θ.

    a = ½(∂₁u₂ + ∂₂u₁), b = ½(∂₁u₂ − ∂₂u₁), c = −½(∂₁u₁ − ∂₂u₂).
    """
    a = (gradu.t21 + gradu.t12) * 0.5
    b = (gradu.t21 - gradu.t12) * 0.5
    c = (gradu.t11 - gradu.t22) * -0.5
    return a, b, c


def fp_drift_modes(f: AngularDistribution, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Modes of −∂θ((a cos 2θ + b + c sin 2θ) f) in real space, shape (J+1, nx, ny)."""
    lower = 0.5 * (a - 1j * c)
    upper = 0.5 * (a + 1j * c)
    drift = np.empty_like(f.coefficients)
    for j in range(f.J + 1):
        coupled = b * f.mode(j) + lower * f.mode(j - 2) + upper * f.mode(j + 2)
        drift[j] = -1j * j * coupled
    return drift


def _dealias_stack(grid: Grid, stack_hat: np.ndarray) -> np.ndarray:
    return np.where(grid.wavenumbers().dealias_mask, stack_hat, 0.0)


def _fp_explicit_hat(u: VectorField, f: AngularDistribution, galerkin: Optional[np.ndarray] = None) -> np.ndarray:
    """Spectral advection and drift part of the Fokker-Planck right side, shape (J+1, nx, ny).

    With a Galerkin mask 𝒥, f is transported by 𝒥u and rotated by 𝒥∇u.
    """
    grid = f.grid
    if galerkin is not None:
        u = VectorField(apply_mask(u.u1, galerkin), apply_mask(u.u2, galerkin))
    wn = grid.wavenumbers()
    spectral = f.spectral
    transport = u.u1.values * ifft2(1j * wn.d1 * spectral) + u.u2.values * ifft2(1j * wn.d2 * spectral)
    a, b, c = (x.values for x in fp_drift_coefficients(velocity_gradient(u)))
    return _dealias_stack(grid, fft2(fp_drift_modes(f, a, b, c) - transport))


def fp_linear_symbol(grid: Grid, J: int, params: DoiParams) -> np.ndarray:
    """−k j² − ν|k|² per mode, shape (J+1, nx, ny)."""
    j = np.arange(J + 1)[:, None, None]
    return -params.k * j**2 - params.nu * grid.wavenumbers().ksq[None]


def fp_rhs(state: DoiState, params: DoiParams) -> AngularDistribution:
    """∂_t ĉ_j for j = 0..J as an :class:`AngularDistribution` of increments."""
    f = state.f
    galerkin = galerkin_mask_for(f.grid, params.galerkin_ell)
    total = _fp_explicit_hat(state.u, f, galerkin) + fp_linear_symbol(f.grid, f.J, params) * f.spectral
    return AngularDistribution(f.grid, ifft2(total))


def polymer_stress(state: DoiState, params: DoiParams, gradu: Optional[TensorField2x2] = None,
                   galerkin: Optional[np.ndarray] = None) -> TensorField2x2:
    """σ_E + σ_V, or 𝒥σ_E + 𝒥σ_V(𝒥∇u) under a Galerkin mask 𝒥."""
    sigma = elastic_stress(state.f)
    if params.eta != 0.0:
        gradu = velocity_gradient(state.u) if gradu is None else gradu
        if galerkin is not None:
            gradu = gradu.map(lambda entry: apply_mask(entry, galerkin))
        sigma = sigma + viscous_stress(state.f, gradu, params.eta)
    if galerkin is not None:
        sigma = sigma.map(lambda entry: apply_mask(entry, galerkin))
    return sigma


def _velocity_explicit(state: DoiState, params: DoiParams, galerkin: Optional[np.ndarray] = None) -> VectorField:
    sigma = polymer_stress(state, params, galerkin=galerkin)
    forcing = -advect_vector(state.u, state.u) + divergence_tensor(sigma)
    return leray_project(forcing)


def doi_velocity_rhs(state: DoiState, params: DoiParams) -> VectorField:
    """ℙ(−u·∇u + ∇·(σ_E + σ_V)) + Δu."""
    explicit = _velocity_explicit(state, params, galerkin_mask_for(state.grid, params.galerkin_ell))
    return explicit + VectorField(laplacian(state.u.u1), laplacian(state.u.u2))


def doi_cfl_limit(state: DoiState, params: DoiParams) -> float:
    """Largest stable dt for advection, the θ-drift and the viscous stress, scaled by cfl_safety."""
    grid = state.grid
    limits = []
    speed = state.u.max_magnitude()
    if speed > 0.0:
        limits.append(min(TWO_PI / grid.nx, TWO_PI / grid.ny) / speed)
    gradu = velocity_gradient(state.u)
    rate = max(entry.max_abs() for entry in (gradu.t11, gradu.t12, gradu.t21, gradu.t22))
    if rate > 0.0:
        limits.append(1.0 / (state.J * 2.0 * rate))
    kmax = max(grid.max_resolved_wavenumber())
    stiffness = params.eta * max(state.f.density().max(), 0.0) * kmax**2
    if stiffness > 0.0:
        limits.append(1.0 / stiffness)
    return params.cfl_safety * min(limits) if limits else math.inf


class DoiIntegrator:
    """Steps Doi states; Crank-Nicolson on Δu, νΔĉ_j and −kj²ĉ_j, explicit transport, drift and stress."""

    def __init__(self, grid: Grid, J: int, params: DoiParams):
        self.grid = grid
        self.J = J
        self.params = params
        ksq = grid.wavenumbers().ksq
        symbol = np.concatenate([np.stack([-ksq, -ksq]), fp_linear_symbol(grid, J, params)])
        self.stepper = IMEXStepper(symbol, params.dt, params.scheme)
        self.galerkin: Optional[np.ndarray] = None
        self.galerkin_saturated = False
        if params.galerkin_ell is not None:
            self.galerkin, self.galerkin_saturated = galerkin_mask(grid, params.galerkin_ell)

    def _to_hat(self, packed: np.ndarray) -> np.ndarray:
        modes = packed[2::2] + 1j * packed[3::2]
        return np.concatenate([fft2(packed[:2].astype(np.complex128)), fft2(modes)])

    def _to_packed(self, stack_hat: np.ndarray) -> np.ndarray:
        values = ifft2(stack_hat)
        packed = np.empty((DoiState.field_count(self.J),) + self.grid.shape)
        packed[:2] = values[:2].real
        packed[2::2] = values[2:].real
        packed[3::2] = values[2:].imag
        return packed

    def _state(self, stack_hat: np.ndarray) -> DoiState:
        u = VectorField(ScalarField.from_spectral(self.grid, stack_hat[0]),
                        ScalarField.from_spectral(self.grid, stack_hat[1]))
        return DoiState(u, AngularDistribution(self.grid, ifft2(stack_hat[2:])))

    def explicit(self, stack_hat: np.ndarray) -> np.ndarray:
        state = self._state(stack_hat)
        velocity = _velocity_explicit(state, self.params, self.galerkin)
        return np.concatenate([
            np.stack([velocity.u1.spectral, velocity.u2.spectral]),
            _fp_explicit_hat(state.u, state.f, self.galerkin),
        ])

    def constrain(self, stack_hat: np.ndarray) -> np.ndarray:
        """Re-project u and zero its mean; the Galerkin cutoff touches u only."""
        out = np.array(stack_hat)
        out[0], out[1] = leray_project_hat(self.grid, out[0], out[1])
        out[0:2, 0, 0] = 0.0
        if self.galerkin is not None:
            out[0:2] = np.where(self.galerkin, out[0:2], 0.0)
        return out

    def check_stability(self, state: DoiState) -> float:
        limit = doi_cfl_limit(state, self.params)
        if self.params.dt > limit:
            message = f"dt={self.params.dt:.3e} exceeds the stability bound {limit:.3e} at t={state.t:.4f}"
            if self.params.enforce_stability:
                raise StabilityError(message)
            logger.warning(message)
        return limit

    def step(self, state: DoiState) -> DoiState:
        self.check_stability(state)
        state_hat = self._to_hat(state.pack())
        explicit_now = self.explicit(state_hat)
        explicit_previous = None
        if self.params.scheme is TimeScheme.CNAB2 and state.tendency is not None:
            explicit_previous = self._to_hat(state.tendency)
        new_hat = self.stepper.advance(state_hat, self.explicit, explicit_now, explicit_previous, self.constrain)
        packed = self._to_packed(self.constrain(new_hat))
        packed[3] = 0.0  # ĉ₀ is real
        step = state.step + 1
        if not np.all(np.isfinite(packed)):
            bad = int(np.argmin(np.all(np.isfinite(packed), axis=(1, 2))))
            name = ("u1", "u2")[bad] if bad < 2 else f"c{(bad - 2) // 2}"
            logger.error(f"Blowup in {name} at step {step} (t={state.t + self.params.dt:.4f})")
            raise BlowupError(step, name)
        tendency = self._to_packed(explicit_now) if self.params.scheme is TimeScheme.CNAB2 else None
        return DoiState.unpack(self.grid, packed, state.t + self.params.dt, step, tendency)


def step_doi(state: DoiState, params: DoiParams) -> DoiState:
    """Advance one step with a throwaway :class:`DoiIntegrator`."""
    return DoiIntegrator(state.grid, state.J, params).step(state)


def _checked_density(f: AngularDistribution, n_theta: int, tol_neg: float) -> tuple[np.ndarray, int]:
    """Reconstructed f with small negatives clipped; raises beyond −tol_neg·max f."""
    values = f.reconstruct(n_theta)
    peak = max(float(values.max()), 0.0)
    floor = float(values.min())
    if floor < -tol_neg * peak:
        raise PositivityError(f"reconstructed density reaches {floor:.3e} (max {peak:.3e})")
    negative = values < 0.0
    clipped = int(negative.sum())
    if clipped:
        logger.warning(f"Clipped {clipped} slightly negative density samples")
        values = np.where(negative, 0.0, values)
    return values, clipped


def _theta_x_integral(integrand: np.ndarray) -> float:
    """∫∫ over θ and x by the rectangle rule on both."""
    n_theta = integrand.shape[0]
    return float(TORUS_AREA * TWO_PI / n_theta * integrand.sum(axis=0).mean())


@dataclass(frozen=True)
class FreeEnergy:
    kinetic: float
    entropy: float
    clipped: int = 0

    @property
    def total(self) -> float:
        return self.kinetic + self.entropy


def free_energy(state: DoiState, n_theta: int = DEFAULT_THETA_POINTS, tol_neg: float = 1e-8) -> FreeEnergy:
    """½‖u‖² and ∫∫(f log f − f + 1) dθ dx.

    Raises:
        PositivityError: if the reconstructed density is negative beyond tolerance.
    """
    values, clipped = _checked_density(state.f, n_theta, tol_neg)
    with np.errstate(divide="ignore", invalid="ignore"):
        f_log_f = np.where(values > 0.0, values * np.log(np.where(values > 0.0, values, 1.0)), 0.0)
    entropy = _theta_x_integral(f_log_f - values + 1.0)
    return FreeEnergy(0.5 * state.u.norm_squared(), entropy, clipped)


@dataclass(frozen=True)
class FisherInformation:
    theta_part: float
    x_part: float


def fisher_information(state: DoiState, n_theta: int = DEFAULT_THETA_POINTS, tol_neg: float = 1e-8) -> FisherInformation:
    """∫∫|∂_θ f|²/f and ∫∫|∇ₓf|²/f by dense θ-quadrature; zero-density samples contribute nothing."""
    f = state.f
    values, _ = _checked_density(f, n_theta, tol_neg)
    wn = f.grid.wavenumbers()
    d_theta = f.reconstruct_theta_derivative(n_theta)
    d_x1 = f.reconstruct_modes(ifft2(1j * wn.d1 * f.spectral), n_theta)
    d_x2 = f.reconstruct_modes(ifft2(1j * wn.d2 * f.spectral), n_theta)
    positive = values > 0.0
    safe = np.where(positive, values, 1.0)
    theta_part = _theta_x_integral(np.where(positive, d_theta**2 / safe, 0.0))
    x_part = _theta_x_integral(np.where(positive, (d_x1**2 + d_x2**2) / safe, 0.0))
    return FisherInformation(theta_part, x_part)


def viscous_dissipation(state: DoiState, params: DoiParams) -> float:
    """η∫∫((∇u):m⊗m)² f = ⟨∇u, σ_V⟩."""
    if params.eta == 0.0:
        return 0.0
    gradu = velocity_gradient(state.u)
    sigma = viscous_stress(state.f, gradu, params.eta, m4=moment_tensor(state.f, 4))
    return sum(gradu.component(i, j).inner(sigma.component(i, j)) for i in (1, 2) for j in (1, 2))


def free_energy_dissipation(state: DoiState, params: DoiParams, n_theta: int = DEFAULT_THETA_POINTS) -> float:
    """‖∇u‖² + k Fisher_θ + ν Fisher_x + η∫∫((∇u):m⊗m)² f, the decay rate of the free energy."""
    fisher = fisher_information(state, n_theta, params.tol_neg)
    return (velocity_gradient_norm_squared(state.u) + params.k * fisher.theta_part
            + params.nu * fisher.x_part + viscous_dissipation(state, params))
