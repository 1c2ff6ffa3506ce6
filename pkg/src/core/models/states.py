"""Simulation states and physical parameters for the DA closure and the kinetic Doi model.

States are immutable snapshots. Each one packs to and from a stack of real-space
float64 arrays, which is also the payload layout of the snapshot files, so a run
restarted from a snapshot continues bit for bit.
"""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.fft

from core.errors import InsufficientDataError
from core.models.fields import ScalarField, TensorField2x2, VectorField
from core.models.grid import TWO_PI, Grid
from core.models.model_enum import StressDealias, TimeScheme

DEFAULT_THETA_POINTS = 256


@dataclass(frozen=True)
class PhysicsParams:
    """Parameters shared by both models.

    Attributes:
        eta: Viscous-stress concentration η ≥ 0.
        k: Rotational diffusivity, > 0.
        nu: Spatial diffusivity ν of the rods, > 0.
        dt: Time step.
        scheme: Integrator tag.
        galerkin_ell: Optional eigenvalue-shell cutoff. It truncates u and enters the stress,
            drift and f-advection terms; A and f keep every resolved mode.
        cfl_safety: Fraction of the explicit stability bound dt may use.
        enforce_stability: Raise when dt exceeds the bound instead of only logging it.
    """
    eta: float = 1.0
    k: float = 1.0
    nu: float = 1.0
    dt: float = 1e-3
    scheme: TimeScheme = TimeScheme.CNAB2
    galerkin_ell: Optional[int] = None
    cfl_safety: float = 0.5
    enforce_stability: bool = True

    def __post_init__(self) -> None:
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.k <= 0 or self.nu <= 0:
            raise ValueError(f"k and nu must be > 0, got k={self.k}, nu={self.nu}")
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.galerkin_ell is not None and self.galerkin_ell < 1:
            raise ValueError(f"galerkin_ell must be >= 1, got {self.galerkin_ell}")


@dataclass(frozen=True)
class DAParams(PhysicsParams):
    """DA parameters; ``tol_trace`` bounds max |Tr A − 1| before a warning."""
    stress_dealias: StressDealias = StressDealias.TWO_THIRDS
    tol_trace: float = 1e-8


@dataclass(frozen=True)
class DoiParams(PhysicsParams):
    """Doi parameters; ``tol_neg`` is the relative negativity tolerance of reconstructed f."""
    tol_neg: float = 1e-8


@dataclass(frozen=True)
class DAState:
    """Velocity u, conformation tensor A (symmetric) and time.

    ``tendency`` holds the previous explicit right-hand side in packed layout when the
    multistep integrator has one; ``step`` counts completed steps.
    """
    u: VectorField
    A: TensorField2x2
    t: float = 0.0
    step: int = 0
    tendency: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    FIELD_COUNT = 5

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def equilibrium(cls, grid: Grid) -> "DAState":
        return cls(VectorField.zeros(grid), TensorField2x2.isotropic(grid))

    def pack(self) -> np.ndarray:
        """(u1, u2, A11, A12, A22) stacked as float64 values."""
        return np.stack([self.u.u1.values, self.u.u2.values, self.A.t11.values, self.A.t12.values, self.A.t22.values])

    @classmethod
    def unpack(cls, grid: Grid, data: np.ndarray, t: float, step: int = 0,
               tendency: Optional[np.ndarray] = None) -> "DAState":
        if data.shape[0] != cls.FIELD_COUNT:
            raise InsufficientDataError(f"DA state needs {cls.FIELD_COUNT} fields, got {data.shape[0]}")
        fields = [ScalarField(grid, values=data[i]) for i in range(cls.FIELD_COUNT)]
        return cls(VectorField(fields[0], fields[1]), TensorField2x2.symmetric_from(fields[2], fields[3], fields[4]),
                   t=t, step=step, tendency=tendency)

    def with_time(self, t: float) -> "DAState":
        return replace(self, t=t)


class AngularDistribution:
    """Orientation density f(x, θ) stored as θ-Fourier coefficients.

    ``coefficients[j]`` holds ĉ_j(x) = (1/2π)∫ f e^{−ijθ} dθ for j = 0..J on the
    collocation points; negative modes are the complex conjugates.
    """

    __slots__ = ("grid", "J", "coefficients", "_spectral")

    def __init__(self, grid: Grid, coefficients: np.ndarray):
        coefficients = np.array(coefficients, dtype=np.complex128)
        if coefficients.ndim != 3 or coefficients.shape[1:] != grid.shape:
            raise ValueError(f"coefficients must have shape (J+1, {grid.nx}, {grid.ny}), got {coefficients.shape}")
        coefficients.setflags(write=False)
        self.grid = grid
        self.J = coefficients.shape[0] - 1
        self.coefficients = coefficients
        self._spectral: Optional[np.ndarray] = None

    @classmethod
    def uniform(cls, grid: Grid, J: int, density: Optional[ScalarField] = None) -> "AngularDistribution":
        """Isotropic f = M₀(x)/2π; M₀ defaults to 2π, i.e. f ≡ 1."""
        coefficients = np.zeros((J + 1,) + grid.shape, dtype=np.complex128)
        coefficients[0] = 1.0 if density is None else density.values / TWO_PI
        return cls(grid, coefficients)

    @classmethod
    def from_theta_samples(cls, grid: Grid, samples: np.ndarray, J: int) -> "AngularDistribution":
        """Coefficients from f sampled at θ_m = 2πm/n_θ (axis 0), n_θ > 2J."""
        n_theta = samples.shape[0]
        if n_theta <= 2 * J:
            raise InsufficientDataError(f"{n_theta} angular samples cannot resolve J={J}")
        modes = scipy.fft.fft(samples, axis=0, norm="forward")
        return cls(grid, modes[: J + 1])

    @property
    def spectral(self) -> np.ndarray:
        """x-transform of every mode, shape (J+1, nx, ny)."""
        if self._spectral is None:
            spectral = scipy.fft.fft2(self.coefficients, norm="forward")
            spectral.setflags(write=False)
            self._spectral = spectral
        return self._spectral

    def mode(self, j: int) -> np.ndarray:
        """ĉ_j for |j| ≤ J, conjugated for negative j; zero beyond the cutoff."""
        if abs(j) > self.J:
            return np.zeros(self.grid.shape, dtype=np.complex128)
        return self.coefficients[j] if j >= 0 else np.conj(self.coefficients[-j])

    def density(self) -> ScalarField:
        """M₀ = 2π Re ĉ₀."""
        return ScalarField(self.grid, values=TWO_PI * self.coefficients[0].real)

    def with_modes(self, J: int) -> "AngularDistribution":
        """Truncate or zero-extend to cutoff J."""
        coefficients = np.zeros((J + 1,) + self.grid.shape, dtype=np.complex128)
        keep = min(J, self.J) + 1
        coefficients[:keep] = self.coefficients[:keep]
        return AngularDistribution(self.grid, coefficients)

    def theta_points(self, n_theta: int = DEFAULT_THETA_POINTS) -> np.ndarray:
        return np.arange(n_theta) * (TWO_PI / n_theta)

    def _full_spectrum(self, weights: np.ndarray, n_theta: int) -> np.ndarray:
        if n_theta <= 2 * self.J:
            raise InsufficientDataError(f"{n_theta} angular points cannot hold J={self.J}")
        full = np.zeros((n_theta,) + self.grid.shape, dtype=np.complex128)
        j = np.arange(self.J + 1)
        full[: self.J + 1] = weights[:, None, None] * self.coefficients
        full[n_theta - j[1:]] = np.conj(weights[1:, None, None] * self.coefficients[1:])
        return full

    def reconstruct(self, n_theta: int = DEFAULT_THETA_POINTS) -> np.ndarray:
        """f(x, θ_m) on n_θ equispaced angles, shape (n_θ, nx, ny)."""
        full = self._full_spectrum(np.ones(self.J + 1), n_theta)
        return scipy.fft.ifft(full, axis=0, norm="forward").real

    def reconstruct_modes(self, modes: np.ndarray, n_theta: int = DEFAULT_THETA_POINTS) -> np.ndarray:
        """Real θ-reconstruction of another coefficient stack with this cutoff (e.g. ∂_i ĉ_j)."""
        return AngularDistribution(self.grid, modes).reconstruct(n_theta)

    def reconstruct_theta_derivative(self, n_theta: int = DEFAULT_THETA_POINTS) -> np.ndarray:
        """∂_θ f on the same angles."""
        full = self._full_spectrum(1j * np.arange(self.J + 1), n_theta)
        return scipy.fft.ifft(full, axis=0, norm="forward").real

    def map_modes(self, func) -> "AngularDistribution":
        """Apply an x-operator (complex array → complex array) to each mode."""
        return AngularDistribution(self.grid, np.stack([func(c) for c in self.coefficients]))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.coefficients)))

    def __repr__(self) -> str:
        return f"AngularDistribution(J={self.J}, grid={self.grid.nx}x{self.grid.ny})"


@dataclass(frozen=True)
class DoiState:
    """Velocity u, orientation density f and time; ``tendency`` as for :class:`DAState`."""
    u: VectorField
    f: AngularDistribution
    t: float = 0.0
    step: int = 0
    tendency: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def J(self) -> int:
        return self.f.J

    @staticmethod
    def field_count(J: int) -> int:
        return 2 + 2 * (J + 1)

    @classmethod
    def equilibrium(cls, grid: Grid, J: int) -> "DoiState":
        return cls(VectorField.zeros(grid), AngularDistribution.uniform(grid, J))

    def pack(self) -> np.ndarray:
        """(u1, u2, Re ĉ₀, Im ĉ₀, …, Re ĉ_J, Im ĉ_J) stacked as float64 values."""
        parts = [self.u.u1.values, self.u.u2.values]
        for mode in self.f.coefficients:
            parts.extend((mode.real, mode.imag))
        return np.stack(parts)

    @classmethod
    def unpack(cls, grid: Grid, data: np.ndarray, t: float, step: int = 0,
               tendency: Optional[np.ndarray] = None) -> "DoiState":
        if data.shape[0] < 4 or data.shape[0] % 2:
            raise InsufficientDataError(f"Doi state needs 2 + 2(J+1) fields, got {data.shape[0]}")
        u = VectorField(ScalarField(grid, values=data[0]), ScalarField(grid, values=data[1]))
        coefficients = data[2::2] + 1j * data[3::2]
        return cls(u, AngularDistribution(grid, coefficients), t=t, step=step, tendency=tendency)

    def with_time(self, t: float) -> "DoiState":
        return replace(self, t=t)
