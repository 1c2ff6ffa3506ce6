"""Periodic scalar, vector and 2×2 tensor fields on a :class:`Grid`.

Fields are value-semantic: the arrays they hold are read-only and every operation
returns a new field. A scalar field keeps a real-space view and a spectral view and
fills whichever is missing on first access.

Spectral coefficients use the ``norm="forward"`` convention, so a constant field c has
a single (0, 0) coefficient equal to c and cos(x₁) has coefficients ½ at (±1, 0).
"""
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.fft

from core.models.grid import TORUS_AREA, Grid

Number = Union[int, float]

_transform_workers = 1


def set_transform_workers(workers: int) -> None:
    """Number of threads used by the FFTs. 1 keeps runs bit-reproducible."""
    global _transform_workers
    _transform_workers = max(1, int(workers))


def fft2(values: np.ndarray) -> np.ndarray:
    """Forward transform over the last two axes."""
    return scipy.fft.fft2(values, norm="forward", workers=_transform_workers)


def ifft2(coefficients: np.ndarray) -> np.ndarray:
    """Inverse transform over the last two axes (complex result)."""
    return scipy.fft.ifft2(coefficients, norm="forward", workers=_transform_workers)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class ScalarField:
    """Real-valued periodic field with lazily synchronised real and spectral views."""

    __slots__ = ("grid", "_values", "_spectral")

    def __init__(self, grid: Grid, values: Optional[np.ndarray] = None, spectral: Optional[np.ndarray] = None):
        if values is None and spectral is None:
            raise ValueError("a ScalarField needs real-space values or spectral coefficients")
        self.grid = grid
        self._values: Optional[np.ndarray] = None
        self._spectral: Optional[np.ndarray] = None
        if values is not None:
            values = np.array(values, dtype=np.float64)
            if values.shape != grid.shape:
                raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
            self._values = _frozen(values)
        if spectral is not None:
            spectral = np.array(spectral, dtype=np.complex128)
            if spectral.shape != grid.shape:
                raise ValueError(f"spectral shape {spectral.shape} does not match grid {grid.shape}")
            self._spectral = _frozen(spectral)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, values=np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, values=np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        x1, x2 = grid.coordinates()
        return cls(grid, values=np.broadcast_to(func(x1, x2), grid.shape))

    @classmethod
    def from_spectral(cls, grid: Grid, coefficients: np.ndarray) -> "ScalarField":
        return cls(grid, spectral=coefficients)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = _frozen(np.ascontiguousarray(ifft2(self._spectral).real))
        return self._values

    @property
    def spectral(self) -> np.ndarray:
        if self._spectral is None:
            self._spectral = _frozen(fft2(self._values))
        return self._spectral

    def _check_grid(self, other: "ScalarField") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other: Union["ScalarField", Number]) -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_grid(other)
            return ScalarField(self.grid, values=self.values + other.values)
        return ScalarField(self.grid, values=self.values + other)

    __radd__ = __add__

    def __sub__(self, other: Union["ScalarField", Number]) -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_grid(other)
            return ScalarField(self.grid, values=self.values - other.values)
        return ScalarField(self.grid, values=self.values - other)

    def __rsub__(self, other: Number) -> "ScalarField":
        return ScalarField(self.grid, values=other - self.values)

    def __mul__(self, other: Union["ScalarField", Number]) -> "ScalarField":
        if isinstance(other, ScalarField):
            self._check_grid(other)
            return ScalarField(self.grid, values=self.values * other.values)
        return ScalarField(self.grid, values=self.values * other)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.grid, values=-self.values)

    def mean(self) -> float:
        return float(self.spectral[0, 0].real)

    def integral(self) -> float:
        return TORUS_AREA * self.mean()

    def inner(self, other: "ScalarField") -> float:
        """L² inner product by grid quadrature."""
        self._check_grid(other)
        return float(TORUS_AREA * np.mean(self.values * other.values))

    def norm_squared(self) -> float:
        return self.inner(self)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared()))

    def spectral_norm_squared(self) -> float:
        """‖f‖² from the spectral coefficients (Parseval)."""
        return float(TORUS_AREA * np.sum(np.abs(self.spectral) ** 2))

    def max(self) -> float:
        return float(self.values.max())

    def min(self) -> float:
        return float(self.values.min())

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def __repr__(self) -> str:
        return f"ScalarField(grid={self.grid.nx}x{self.grid.ny}, mean={self.mean():.6g})"


@dataclass(frozen=True)
class VectorField:
    """Pair of scalar fields (u₁, u₂)."""
    u1: ScalarField
    u2: ScalarField

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(ScalarField.zeros(grid), ScalarField.zeros(grid))

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    def components(self) -> tuple[ScalarField, ScalarField]:
        return (self.u1, self.u2)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.u1 + other.u1, self.u2 + other.u2)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.u1 - other.u1, self.u2 - other.u2)

    def __mul__(self, factor: Number) -> "VectorField":
        return VectorField(self.u1 * factor, self.u2 * factor)

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return VectorField(-self.u1, -self.u2)

    def dot(self, other: "VectorField") -> ScalarField:
        """Pointwise u·v (no dealiasing)."""
        return self.u1 * other.u1 + self.u2 * other.u2

    def inner(self, other: "VectorField") -> float:
        return self.u1.inner(other.u1) + self.u2.inner(other.u2)

    def norm_squared(self) -> float:
        return self.inner(self)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared()))

    def max_magnitude(self) -> float:
        return float(np.sqrt(self.u1.values**2 + self.u2.values**2).max())

    def is_finite(self) -> bool:
        return self.u1.is_finite() and self.u2.is_finite()


class TensorField2x2:
    """Pointwise 2×2 tensor; a symmetric tensor shares one field for t12 and t21."""

    __slots__ = ("t11", "t12", "t21", "t22", "symmetric")

    def __init__(self, t11: ScalarField, t12: ScalarField, t21: ScalarField, t22: ScalarField):
        self.t11 = t11
        self.t12 = t12
        self.t21 = t21
        self.t22 = t22
        self.symmetric = t12 is t21

    @classmethod
    def symmetric_from(cls, t11: ScalarField, t12: ScalarField, t22: ScalarField) -> "TensorField2x2":
        return cls(t11, t12, t12, t22)

    @classmethod
    def isotropic(cls, grid: Grid, value: float = 0.5) -> "TensorField2x2":
        zero = ScalarField.zeros(grid)
        diag = ScalarField.constant(grid, value)
        return cls.symmetric_from(diag, zero, diag)

    @classmethod
    def zeros(cls, grid: Grid) -> "TensorField2x2":
        return cls.isotropic(grid, 0.0)

    @property
    def grid(self) -> Grid:
        return self.t11.grid

    def component(self, i: int, j: int) -> ScalarField:
        """Entry (i, j) with 1-based indices."""
        return ((self.t11, self.t12), (self.t21, self.t22))[i - 1][j - 1]

    def entries(self) -> tuple[ScalarField, ...]:
        """Stored entries: (t11, t12, t22) if symmetric, else all four."""
        if self.symmetric:
            return (self.t11, self.t12, self.t22)
        return (self.t11, self.t12, self.t21, self.t22)

    def _combine(self, other: "TensorField2x2", op) -> "TensorField2x2":
        if self.symmetric and other.symmetric:
            return TensorField2x2.symmetric_from(op(self.t11, other.t11), op(self.t12, other.t12), op(self.t22, other.t22))
        return TensorField2x2(op(self.t11, other.t11), op(self.t12, other.t12), op(self.t21, other.t21), op(self.t22, other.t22))

    def __add__(self, other: "TensorField2x2") -> "TensorField2x2":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: "TensorField2x2") -> "TensorField2x2":
        return self._combine(other, lambda a, b: a - b)

    def scaled(self, factor: Union[ScalarField, Number]) -> "TensorField2x2":
        if self.symmetric:
            return TensorField2x2.symmetric_from(self.t11 * factor, self.t12 * factor, self.t22 * factor)
        return TensorField2x2(self.t11 * factor, self.t12 * factor, self.t21 * factor, self.t22 * factor)

    def map(self, func: Callable[[ScalarField], ScalarField]) -> "TensorField2x2":
        """Apply a linear field operator entrywise, preserving symmetry."""
        if self.symmetric:
            return TensorField2x2.symmetric_from(func(self.t11), func(self.t12), func(self.t22))
        return TensorField2x2(func(self.t11), func(self.t12), func(self.t21), func(self.t22))

    def transpose(self) -> "TensorField2x2":
        if self.symmetric:
            return self
        return TensorField2x2(self.t11, self.t21, self.t12, self.t22)

    def trace(self) -> ScalarField:
        return self.t11 + self.t22

    def det(self) -> ScalarField:
        return self.t11 * self.t22 - self.t12 * self.t21

    def double_dot(self, other: "TensorField2x2") -> ScalarField:
        """Pointwise Σ_ij a_ij b_ij (no dealiasing)."""
        return self.t11 * other.t11 + self.t12 * other.t12 + self.t21 * other.t21 + self.t22 * other.t22

    def frobenius_squared(self) -> ScalarField:
        return self.double_dot(self)

    def max_spectral_norm(self) -> float:
        """max over x of the largest singular value, i.e. the L∞ norm of the tensor field."""
        stacked = np.stack([
            np.stack([self.t11.values, self.t12.values], axis=-1),
            np.stack([self.t21.values, self.t22.values], axis=-1),
        ], axis=-2)
        return float(np.linalg.norm(stacked, ord=2, axis=(-2, -1)).max())

    def norm_squared(self) -> float:
        return sum(a.norm_squared() for a in (self.t11, self.t12, self.t21, self.t22))

    def is_finite(self) -> bool:
        return all(entry.is_finite() for entry in self.entries())

    def __repr__(self) -> str:
        kind = "symmetric" if self.symmetric else "general"
        return f"TensorField2x2({kind}, grid={self.grid.nx}x{self.grid.ny})"
