"""Exact coefficient tables for angular moments.

A moment ∫cos^pθ sin^qθ f dθ is a rational combination of the trigonometric moments
s_m, read off from the expansion cos^pθ sin^qθ = Σ_m w_m e^{imθ}. The moment equations

    ∂_t M_n + u·∇M_n = k T1_n M_n + νΔM_n + T2_n(∇u, M_{n+2})

follow from the Fokker-Planck equation in angle form by moving ∂_θ onto the monomial:

    ∂_θ²(c^p s^q) = p(p−1) c^{p−2}s^{q+2} − (2pq + p + q) c^p s^q + q(q−1) c^{p+2}s^{q−2}
    ∂_θ(c^p s^q)·h = (−p c^{p−1}s^{q+1} + q c^{p+1}s^{q−1})(κ₂₁c² − κ₁₂s² + (κ₂₂ − κ₁₁)cs)

with c = cos θ, s = sin θ and κ_ij = ∂_j u_i. Components are labelled by (p, q).
"""
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

GaussianRational = tuple[Fraction, Fraction]

_ZERO: GaussianRational = (Fraction(0), Fraction(0))
_COS = {1: (Fraction(1, 2), Fraction(0)), -1: (Fraction(1, 2), Fraction(0))}
_SIN = {1: (Fraction(0), Fraction(-1, 2)), -1: (Fraction(0), Fraction(1, 2))}


def _multiply(a: GaussianRational, b: GaussianRational) -> GaussianRational:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _convolve(left: dict[int, GaussianRational], right: dict[int, GaussianRational]) -> dict[int, GaussianRational]:
    out: dict[int, GaussianRational] = {}
    for m1, w1 in left.items():
        for m2, w2 in right.items():
            re, im = _multiply(w1, w2)
            old = out.get(m1 + m2, _ZERO)
            out[m1 + m2] = (old[0] + re, old[1] + im)
    return {m: w for m, w in out.items() if w != _ZERO}


@lru_cache(maxsize=None)
def trig_expansion(p: int, q: int) -> dict[int, GaussianRational]:
    """Exact w_m with cos^pθ sin^qθ = Σ_m w_m e^{imθ}; w_{−m} = conj(w_m)."""
    poly: dict[int, GaussianRational] = {0: (Fraction(1), Fraction(0))}
    for _ in range(p):
        poly = _convolve(poly, _COS)
    for _ in range(q):
        poly = _convolve(poly, _SIN)
    return poly


class MomentWeight(NamedTuple):
    """Contribution ``scale·(re·Re s_m + im·Im s_m)`` of s_m to a moment."""
    m: int
    re: Fraction
    im: Fraction


@lru_cache(maxsize=None)
def moment_weights(p: int, q: int) -> tuple[MomentWeight, ...]:
    """Weights for M = w₀ s₀ + 2 Σ_{m>0} Re(w_m conj(s_m)), folded to real coefficients."""
    expansion = trig_expansion(p, q)
    weights = []
    for m in sorted(k for k in expansion if k >= 0):
        re, im = expansion[m]
        factor = 1 if m == 0 else 2
        weights.append(MomentWeight(m, factor * re, factor * im))
    return tuple(weights)


class DiffusionTerm(NamedTuple):
    """coefficient · M^{(p, q)} inside k T1_n M_n."""
    p: int
    q: int
    coefficient: int


class DriftTerm(NamedTuple):
    """coefficient · κ_{ij} · M^{(p, q)}_{n+2} inside T2_n(∇u, M_{n+2})."""
    i: int
    j: int
    p: int
    q: int
    coefficient: int


@lru_cache(maxsize=None)
def theta_diffusion_table(p: int, q: int) -> tuple[DiffusionTerm, ...]:
    """T1 row of component (p, q): the moment of ∂_θ² f in terms of order-(p+q) moments."""
    terms = []
    if p >= 2:
        terms.append(DiffusionTerm(p - 2, q + 2, p * (p - 1)))
    terms.append(DiffusionTerm(p, q, -(2 * p * q + p + q)))
    if q >= 2:
        terms.append(DiffusionTerm(p + 2, q - 2, q * (q - 1)))
    return tuple(t for t in terms if t.coefficient != 0)


@lru_cache(maxsize=None)
def drift_table(p: int, q: int) -> tuple[DriftTerm, ...]:
    """T2 row of component (p, q): the moment of −∂_θ(h f) in terms of order-(p+q+2) moments."""
    raw: dict[tuple[int, int, int, int], int] = {}

    def add(i: int, j: int, pp: int, qq: int, coefficient: int) -> None:
        if coefficient and pp >= 0 and qq >= 0:
            raw[(i, j, pp, qq)] = raw.get((i, j, pp, qq), 0) + coefficient

    if p:
        add(2, 1, p + 1, q + 1, -p)
        add(1, 2, p - 1, q + 3, p)
        add(2, 2, p, q + 2, -p)
        add(1, 1, p, q + 2, p)
    if q:
        add(2, 1, p + 3, q - 1, q)
        add(1, 2, p + 1, q + 1, -q)
        add(2, 2, p + 2, q, q)
        add(1, 1, p + 2, q, -q)
    return tuple(DriftTerm(i, j, pp, qq, c) for (i, j, pp, qq), c in sorted(raw.items()) if c)


def export_tables(max_order: int = 6) -> dict:
    """Serializable dump of the expansion, T1 and T2 tables up to ``max_order``."""
    out: dict = {"expansion": {}, "theta_diffusion": {}, "drift": {}}
    for n in range(max_order + 1):
        for p in range(n, -1, -1):
            q = n - p
            key = f"{p},{q}"
            expansion = trig_expansion(p, q)
            out["expansion"][key] = {str(m): [str(expansion[m][0]), str(expansion[m][1])] for m in sorted(expansion)}
            out["theta_diffusion"][key] = [t._asdict() for t in theta_diffusion_table(p, q)]
            out["drift"][key] = [t._asdict() for t in drift_table(p, q)]
    return out
