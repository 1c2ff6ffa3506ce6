"""Named initial conditions for both models.

Every preset yields a divergence-free, mean-free velocity. DA presets keep Tr A ≡ 1 and
A positive definite; Doi presets are nonnegative densities.
"""
import logging
from typing import Optional

import numpy as np
import scipy.special

from core.models.config_data import InitSection
from core.models.fields import ScalarField, TensorField2x2, VectorField
from core.models.grid import TWO_PI, Grid
from core.models.model_enum import InitPreset
from core.models.states import DEFAULT_THETA_POINTS, AngularDistribution, DAState, DoiState
from core.processing.spectral import velocity_from_vorticity

logger = logging.getLogger(__name__)

MAX_PERTURBATION = 0.45


def taylor_green(grid: Grid, amplitude: float = 1.0) -> VectorField:
    """u = a(sin x₁ cos x₂, −cos x₁ sin x₂), vorticity 2a sin x₁ sin x₂."""
    u1 = ScalarField.from_function(grid, lambda x1, x2: amplitude * np.sin(x1) * np.cos(x2))
    u2 = ScalarField.from_function(grid, lambda x1, x2: -amplitude * np.cos(x1) * np.sin(x2))
    return VectorField(u1, u2)


def random_band_field(grid: Grid, rng: np.random.Generator, band: int) -> ScalarField:
    """Mean-free real field with modes |k_i| ≤ band and unit L² norm."""
    noise = ScalarField(grid, values=rng.standard_normal(grid.shape))
    wn = grid.wavenumbers()
    keep = (np.abs(wn.k1) <= band) & (np.abs(wn.k2) <= band) & (wn.ksq > 0)
    field = ScalarField.from_spectral(grid, np.where(keep, noise.spectral, 0.0))
    norm = field.norm()
    return field * (1.0 / norm) if norm > 0.0 else field


def random_velocity(grid: Grid, rng: np.random.Generator, band: int, amplitude: float) -> VectorField:
    """Divergence-free velocity of L² norm ``amplitude`` from a random vorticity."""
    u = velocity_from_vorticity(random_band_field(grid, rng, band))
    norm = u.norm()
    return u * (amplitude / norm) if norm > 0.0 else u


def perturbed_conformation(grid: Grid, a: ScalarField, b: ScalarField, size: float) -> TensorField2x2:
    """A = ½I + size·[[a, b], [b, −a]] / max|(a, b)|; trace one, det ≥ ¼ − size²."""
    if not 0.0 <= size <= MAX_PERTURBATION:
        raise ValueError(f"conformation perturbation must lie in [0, {MAX_PERTURBATION}], got {size}")
    scale = float(np.sqrt(a.values**2 + b.values**2).max())
    factor = size / scale if scale > 0.0 else 0.0
    half = ScalarField.constant(grid, 0.5)
    return TensorField2x2.symmetric_from(half + a * factor, b * factor, half - a * factor)


def constant_conformation(grid: Grid, a11: float) -> TensorField2x2:
    return TensorField2x2.symmetric_from(
        ScalarField.constant(grid, a11), ScalarField.zeros(grid), ScalarField.constant(grid, 1.0 - a11)
    )


def da_initial_state(grid: Grid, init: InitSection, seed: int = 0) -> DAState:
    """DA state for a preset other than ``snapshot``."""
    preset = init.preset
    if preset is InitPreset.EQUILIBRIUM:
        return DAState.equilibrium(grid)
    if preset is InitPreset.RELAXATION:
        return DAState(VectorField.zeros(grid), constant_conformation(grid, init.a0))
    if preset is InitPreset.TAYLOR_GREEN:
        a = ScalarField.from_function(grid, lambda x1, x2: np.cos(x1) * np.cos(x2))
        b = ScalarField.from_function(grid, lambda x1, x2: np.sin(x1 + x2))
        return DAState(taylor_green(grid, init.amplitude), perturbed_conformation(grid, a, b, init.perturbation))
    if preset is InitPreset.RANDOM:
        rng = np.random.default_rng(seed)
        u = random_velocity(grid, rng, init.band, init.amplitude)
        a = random_band_field(grid, rng, init.band)
        b = random_band_field(grid, rng, init.band)
        return DAState(u, perturbed_conformation(grid, a, b, init.perturbation))
    raise ValueError(f"preset {preset.value!r} has no DA initial state")


def von_mises_samples(theta: np.ndarray, concentration: float, direction: np.ndarray,
                      density: np.ndarray) -> np.ndarray:
    """f ∝ exp(κ cos 2(θ − θ₀(x))) normalized to ∫f dθ = M₀(x), shape (n_θ, nx, ny)."""
    angle = theta[:, None, None] - direction[None, :, :]
    # exp(κ(cos − 1)) keeps large κ finite; the normalization uses the scaled Bessel function
    shape = np.exp(concentration * (np.cos(2.0 * angle) - 1.0))
    return density[None, :, :] * shape / (TWO_PI * scipy.special.ive(0, concentration))


def von_mises_distribution(grid: Grid, J: int, concentration: float, direction: ScalarField,
                           density: ScalarField, n_theta: int = DEFAULT_THETA_POINTS) -> AngularDistribution:
    """Von Mises orientation density with coefficients by n_θ-point quadrature."""
    theta = np.arange(n_theta) * (TWO_PI / n_theta)
    samples = von_mises_samples(theta, concentration, direction.values, density.values)
    return AngularDistribution.from_theta_samples(grid, samples, J)


def von_mises_modes_exact(J: int, concentration: float, direction: np.ndarray, density: np.ndarray) -> np.ndarray:
    """ĉ_{2m} = (M₀/2π)·I_m(κ)/I₀(κ)·e^{−2imθ₀}; odd modes vanish."""
    modes = np.zeros((J + 1,) + np.shape(direction), dtype=np.complex128)
    for m in range(J // 2 + 1):
        ratio = scipy.special.ive(m, concentration) / scipy.special.ive(0, concentration)
        modes[2 * m] = density / TWO_PI * ratio * np.exp(-2j * m * direction)
    return modes


def _density(grid: Grid, init: InitSection, wavy: bool) -> ScalarField:
    """M₀ with mean ``mass`` and, if wavy, a relative perturbation cos x₁ cos x₂."""
    if not wavy or init.perturbation == 0.0:
        return ScalarField.constant(grid, init.mass)
    if init.perturbation >= 1.0:
        raise ValueError(f"density perturbation must be < 1, got {init.perturbation}")
    return ScalarField.from_function(
        grid, lambda x1, x2: init.mass * (1.0 + init.perturbation * np.cos(x1) * np.cos(x2)))


def doi_initial_state(grid: Grid, J: int, init: InitSection, seed: int = 0,
                      direction: Optional[ScalarField] = None) -> DoiState:
    """Doi state for a preset other than ``snapshot``."""
    preset = init.preset
    if preset is InitPreset.EQUILIBRIUM:
        return DoiState.equilibrium(grid, J)
    if preset is InitPreset.UNIFORM:
        return DoiState(VectorField.zeros(grid), AngularDistribution.uniform(grid, J, _density(grid, init, True)))
    if preset is InitPreset.VON_MISES:
        if direction is None:
            direction = ScalarField.from_function(grid, lambda x1, x2: 0.5 * np.sin(x1) * np.sin(x2))
        f = von_mises_distribution(grid, J, init.kappa, direction, _density(grid, init, True))
        return DoiState(VectorField.zeros(grid), f)
    if preset is InitPreset.TAYLOR_GREEN:
        direction = ScalarField.from_function(grid, lambda x1, x2: 0.25 * np.pi)
        f = von_mises_distribution(grid, J, init.kappa, direction, _density(grid, init, False))
        return DoiState(taylor_green(grid, init.amplitude), f)
    if preset is InitPreset.RANDOM:
        rng = np.random.default_rng(seed)
        u = random_velocity(grid, rng, init.band, init.amplitude)
        direction = random_band_field(grid, rng, init.band) * np.pi
        f = von_mises_distribution(grid, J, init.kappa, direction, _density(grid, init, True))
        return DoiState(u, f)
    raise ValueError(f"preset {preset.value!r} has no Doi initial state")
