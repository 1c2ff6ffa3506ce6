"""Norm ledger: one :class:`DiagnosticsRecord` per sampled state.

Grönwall-type bounds on these quantities are reported, never asserted.
"""
import logging
import math
from typing import Union

import numpy as np

from core.errors import PositivityError
from core.models.diagnostics_data import DiagnosticsRecord
from core.models.states import DAParams, DAState, DoiParams, DoiState
from core.processing.cancellation import cancellation_split_da_high, cancellation_split_doi_high
from core.processing.closure_da import conformation_structure, stress_invariant
from core.processing.kinetic_doi import free_energy, viscous_dissipation
from core.processing.moments import (
    elastic_stress,
    moment_bound_violation,
    moment_tensor,
    toeplitz_realizability,
    trig_moments,
)
from core.processing.spectral import gradient, laplacian, sobolev_norm, velocity_gradient, vorticity

logger = logging.getLogger(__name__)


def _flow_record(state: Union[DAState, DoiState], visc_dissipation: float) -> DiagnosticsRecord:
    omega = vorticity(state.u)
    return DiagnosticsRecord(
        t=state.t,
        step=state.step,
        kinetic_energy=0.5 * state.u.norm_squared(),
        enstrophy=omega.norm_squared(),
        velocity_norm=state.u.norm(),
        vorticity_norm=omega.norm(),
        vorticity_gradient_norm=gradient(omega).norm(),
        visc_dissipation=visc_dissipation,
    )


def _tensor_norm(entries, order: int) -> float:
    return math.sqrt(sum(sobolev_norm(entry, order) ** 2 for entry in entries))


def da_ledger(state: DAState, params: DAParams, with_splits: bool = False) -> DiagnosticsRecord:
    G = stress_invariant(velocity_gradient(state.u), state.A)
    record = _flow_record(state, params.eta * G.norm_squared())
    structure = conformation_structure(state.A)
    record.min_det = structure.min_det
    record.max_det = structure.max_det
    record.max_trace_dev = structure.max_trace_dev
    record.max_norm_A = structure.max_norm
    record.frobenius_defect = structure.frobenius_defect
    record.grad_A_norm = math.sqrt(sum(gradient(a).norm_squared() for a in state.A.entries()))
    record.lap_A_norm = math.sqrt(sum(laplacian(a).norm_squared() for a in state.A.entries()))
    if with_splits:
        record.high_dissipation = cancellation_split_da_high(state.u, state.A, params.eta).dissipative
    return record


def doi_ledger(state: DoiState, params: DoiParams, with_toeplitz: bool = True,
               with_splits: bool = False) -> DiagnosticsRecord:
    f = state.f
    record = _flow_record(state, viscous_dissipation(state, params) if f.J >= 4 else math.nan)
    m0 = f.density()
    record.mass = m0.integral()
    record.m0_min = m0.min()
    record.m0_max = m0.max()
    record.m0_norm = m0.norm()
    record.grad_m0_norm = gradient(m0).norm()
    try:
        energy = free_energy(state, tol_neg=params.tol_neg)
        record.free_energy = energy.total
        record.entropy = energy.entropy
        record.clipped = energy.clipped
    except PositivityError as e:
        logger.warning(f"Free energy skipped at t={state.t:.4f}: {e}")
    if f.J >= 2:
        record.elastic_stress_w12 = _tensor_norm(elastic_stress(f).entries(), 1)
    if f.J >= 4:
        record.m4_w22 = math.sqrt(sum(sobolev_norm(c, 2) ** 2 for _, c in moment_tensor(f, 4).items()))
        record.moment_bound_violation = max(moment_bound_violation(f, n) for n in (2, 4))
    if f.J >= 6:
        record.m6_w12 = math.sqrt(sum(sobolev_norm(c, 1) ** 2 for _, c in moment_tensor(f, 6).items()))
    if with_toeplitz:
        report = toeplitz_realizability(trig_moments(f), psd_tol=params.tol_neg)
        record.min_toeplitz_eig = float(np.min(report.min_eigenvalue.values))
        record.violation_count = report.violation_count
    if with_splits and f.J >= 4:
        record.high_dissipation = cancellation_split_doi_high(state.u, f, params.eta).dissipative
    return record


def norm_ledger(state: Union[DAState, DoiState], params: Union[DAParams, DoiParams],
                with_toeplitz: bool = True, with_splits: bool = False) -> DiagnosticsRecord:
    """Ledger row for either model.

    Args:
        state: State to measure.
        params: Parameters of the run that produced it.
        with_toeplitz: Run the pointwise Toeplitz eigenvalue check (Doi only).
        with_splits: Evaluate the high-order cancellation split on a padded grid.
    """
    if isinstance(state, DAState):
        return da_ledger(state, params, with_splits)
    return doi_ledger(state, params, with_toeplitz, with_splits)
