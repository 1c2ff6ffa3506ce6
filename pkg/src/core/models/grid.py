"""Periodic grid on the torus [0, 2π)² and its cached wavenumber tables."""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

TWO_PI = 2.0 * math.pi
TORUS_AREA = TWO_PI * TWO_PI


class Grid(BaseModel):
    """N×N-type collocation grid on the 2π-periodic torus.

    Attributes:
        nx: Number of points (and Fourier modes) along x₁. Even, at least 8.
        ny: Number of points along x₂. Even, at least 8.
        dealias_fraction: Fraction of each half-spectrum kept by :func:`dealias`.
    """
    model_config = ConfigDict(frozen=True)

    nx: int = 64
    ny: int = 64
    dealias_fraction: float = 2.0 / 3.0

    @field_validator("nx", "ny")
    @classmethod
    def _check_size(cls, value: int) -> int:
        if value < 8 or value % 2:
            raise ValueError(f"grid size must be an even integer >= 8, got {value}")
        return value

    @field_validator("dealias_fraction")
    @classmethod
    def _check_fraction(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError(f"dealias_fraction must lie in (0, 1], got {value}")
        return value

    @property
    def lx(self) -> float:
        return TWO_PI

    @property
    def ly(self) -> float:
        return TWO_PI

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return TORUS_AREA / (self.nx * self.ny)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Collocation points (x₁, x₂) with ``indexing="ij"``."""
        x1 = np.arange(self.nx) * (TWO_PI / self.nx)
        x2 = np.arange(self.ny) * (TWO_PI / self.ny)
        return np.meshgrid(x1, x2, indexing="ij")

    def with_size(self, nx: int, ny: int) -> "Grid":
        return Grid(nx=nx, ny=ny, dealias_fraction=self.dealias_fraction)

    def padded(self, factor: int = 2) -> "Grid":
        """Finer scratch grid used to evaluate products without aliasing."""
        return self.with_size(self.nx * factor, self.ny * factor)

    def max_resolved_wavenumber(self) -> tuple[int, int]:
        """Largest |k_i| kept by the dealiasing mask along each axis."""
        kx = math.floor(self.dealias_fraction * self.nx / 2 + 1e-12)
        ky = math.floor(self.dealias_fraction * self.ny / 2 + 1e-12)
        return kx, ky

    def wavenumbers(self) -> "Wavenumbers":
        return _wavenumbers(self.nx, self.ny, self.dealias_fraction)


@dataclass(frozen=True)
class Wavenumbers:
    """Spectral tables of a grid, shared by every field on it.

    Attributes:
        k1, k2: Integer wavenumbers in ``numpy.fft`` order; Nyquist carried as -n/2.
        d1, d2: First-derivative wavenumbers with the Nyquist entry set to zero.
        ksq: |k|², used by the Laplacian.
        dsq: d1² + d2², the symbol of ∇·∇ with Nyquist-free derivatives.
        dealias_mask: True where a mode survives the dealiasing rule.
    """
    k1: np.ndarray
    k2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    ksq: np.ndarray
    dsq: np.ndarray
    dealias_mask: np.ndarray

    def mask_for(self, fraction: float) -> np.ndarray:
        n1, n2 = self.k1.shape
        return (np.abs(self.k1) <= fraction * n1 / 2 + 1e-12) & (np.abs(self.k2) <= fraction * n2 / 2 + 1e-12)


@lru_cache(maxsize=32)
def _wavenumbers(nx: int, ny: int, fraction: float) -> Wavenumbers:
    k1_1d = np.fft.fftfreq(nx, d=1.0 / nx)
    k2_1d = np.fft.fftfreq(ny, d=1.0 / ny)
    d1_1d = k1_1d.copy()
    d2_1d = k2_1d.copy()
    d1_1d[nx // 2] = 0.0
    d2_1d[ny // 2] = 0.0
    k1, k2 = np.meshgrid(k1_1d, k2_1d, indexing="ij")
    d1, d2 = np.meshgrid(d1_1d, d2_1d, indexing="ij")
    mask = (np.abs(k1) <= fraction * nx / 2 + 1e-12) & (np.abs(k2) <= fraction * ny / 2 + 1e-12)
    tables = Wavenumbers(
        k1=k1,
        k2=k2,
        d1=d1,
        d2=d2,
        ksq=k1**2 + k2**2,
        dsq=d1**2 + d2**2,
        dealias_mask=mask,
    )
    for array in (tables.k1, tables.k2, tables.d1, tables.d2, tables.ksq, tables.dsq, tables.dealias_mask):
        array.setflags(write=False)
    return tables
