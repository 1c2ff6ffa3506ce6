"""Angular moment containers."""
from dataclasses import dataclass, field
from math import comb
from typing import Iterator

import numpy as np

from core.models.fields import ScalarField
from core.models.grid import Grid


def multi_index(p: int, q: int) -> tuple[int, ...]:
    """Sorted multi-index with p ones and q twos, i.e. the component ∫cos^pθ sin^qθ f."""
    return (1,) * p + (2,) * q


def exponents(index: tuple[int, ...]) -> tuple[int, int]:
    """(p, q) of a multi-index in any order."""
    return index.count(1), index.count(2)


@dataclass(frozen=True)
class MomentTensor:
    """Order-n symmetric moment tensor M_n^I(x) = ∫ m^I f dθ.

    Only the n + 1 distinct components are stored, keyed by sorted multi-index;
    :meth:`component` accepts any permutation.
    """
    n: int
    components: dict[tuple[int, ...], ScalarField] = field(default_factory=dict)

    def component(self, *index: int) -> ScalarField:
        if len(index) != self.n:
            raise KeyError(f"order-{self.n} tensor indexed with {len(index)} indices")
        return self.components[tuple(sorted(index))]

    def by_exponents(self, p: int, q: int) -> ScalarField:
        return self.components[multi_index(p, q)]

    def items(self) -> Iterator[tuple[tuple[int, ...], ScalarField]]:
        return iter(sorted(self.components.items()))

    def max_abs(self) -> float:
        return max(c.max_abs() for c in self.components.values())

    def norm_squared(self) -> float:
        """Σ over all n-index permutations of ‖M^I‖², counting multiplicities."""
        total = 0.0
        for index, value in self.components.items():
            p, q = exponents(index)
            total += comb(self.n, p) * value.norm_squared()
        return total


@dataclass(frozen=True)
class TrigMomentSequence:
    """s_j(x) = ∫ e^{−ijθ} f dθ = 2π ĉ_j(x) for j = 0..J, stacked as (J+1, nx, ny)."""
    grid: Grid
    s: np.ndarray

    @property
    def J(self) -> int:
        return self.s.shape[0] - 1

    def mode(self, j: int) -> np.ndarray:
        """s_j with s_{−j} = conj(s_j)."""
        return self.s[j] if j >= 0 else np.conj(self.s[-j])

    @property
    def s0(self) -> np.ndarray:
        return self.s[0].real

    def bound_violation(self) -> float:
        """max_x max_j (|s_j| − s₀); non-positive for a nonnegative density."""
        return float((np.abs(self.s[1:]) - self.s0[None]).max()) if self.J else 0.0
