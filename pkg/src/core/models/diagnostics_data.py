"""Per-step diagnostic rows written to ``diagnostics.csv``."""
import math
from dataclasses import asdict, dataclass, fields
from typing import Optional

from core.models.model_enum import ModelKind

NAN = math.nan


@dataclass
class DiagnosticsRecord:
    """One row of scalars describing a state.

    Shared columns come first; DA-only and Doi-only columns are NaN for the other
    model. ``energy_residual`` and ``det_residual`` need three consecutive states and
    are filled by the runner when its history allows.

    Attributes:
        t: Simulated time.
        step: Completed steps.
        kinetic_energy: ½‖u‖².
        enstrophy: ‖ω‖².
        velocity_norm: ‖u‖.
        vorticity_norm: ‖ω‖.
        vorticity_gradient_norm: ‖∇ω‖.
        visc_dissipation: Work of the polymer viscous stress, η‖(∇u):A‖² or η∫∫((∇u):m⊗m)² f.
        high_dissipation: Dissipative part of the high-order cancellation split (≤ 0).
        energy_residual: Centered-difference energy-budget residual.
    """
    t: float
    step: int
    kinetic_energy: float
    enstrophy: float
    velocity_norm: float
    vorticity_norm: float
    vorticity_gradient_norm: float
    visc_dissipation: float
    high_dissipation: float = NAN
    energy_residual: float = NAN
    # DA
    min_det: float = NAN
    max_det: float = NAN
    max_trace_dev: float = NAN
    max_norm_A: float = NAN
    frobenius_defect: float = NAN
    grad_A_norm: float = NAN
    lap_A_norm: float = NAN
    det_residual: float = NAN
    # Doi
    mass: float = NAN
    free_energy: float = NAN
    entropy: float = NAN
    clipped: float = NAN
    m0_min: float = NAN
    m0_max: float = NAN
    m0_norm: float = NAN
    grad_m0_norm: float = NAN
    elastic_stress_w12: float = NAN
    m4_w22: float = NAN
    m6_w12: float = NAN
    moment_bound_violation: float = NAN
    min_toeplitz_eig: float = NAN
    violation_count: float = NAN

    def as_row(self, model: Optional[ModelKind] = None) -> dict[str, float]:
        """Column name to value, restricted to the columns of ``model`` if given."""
        row = asdict(self)
        if model is None:
            return row
        return {name: row[name] for name in columns(model)}


SHARED_COLUMNS = (
    "t", "step", "kinetic_energy", "enstrophy", "velocity_norm", "vorticity_norm",
    "vorticity_gradient_norm", "visc_dissipation", "high_dissipation", "energy_residual",
)
DA_COLUMNS = (
    "min_det", "max_det", "max_trace_dev", "max_norm_A", "frobenius_defect",
    "grad_A_norm", "lap_A_norm", "det_residual",
)
DOI_COLUMNS = (
    "mass", "free_energy", "entropy", "clipped", "m0_min", "m0_max", "m0_norm", "grad_m0_norm",
    "elastic_stress_w12", "m4_w22", "m6_w12", "moment_bound_violation", "min_toeplitz_eig",
    "violation_count",
)

assert set(SHARED_COLUMNS + DA_COLUMNS + DOI_COLUMNS) == {f.name for f in fields(DiagnosticsRecord)}


def columns(model: ModelKind) -> tuple[str, ...]:
    """CSV header for a model."""
    return SHARED_COLUMNS + (DA_COLUMNS if model is ModelKind.DA else DOI_COLUMNS)
