"""Runs the cancellation identities and structural checks on a state or snapshot file."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from core.errors import IdentityClosureError
from core.models.states import DAState, DoiState
from core.processing.cancellation import (
    CLOSURE_TOLERANCE,
    CancellationSplit,
    cancellation_split_da,
    cancellation_split_da_high,
    cancellation_split_doi,
    cancellation_split_doi_high,
)
from core.processing.closure_da import conformation_structure
from core.processing.moments import toeplitz_realizability, trig_moments
from core.services.snapshot_io import SnapshotHeader, read_snapshot, state_from_snapshot

logger = logging.getLogger(__name__)


@dataclass
class IdentityReport:
    """Outcome of the identity suite on one state.

    Attributes:
        t: Time of the checked state.
        splits: Split name to its terms.
        structure: Scalar structural checks (min det A or the minimum Toeplitz eigenvalue).
        tolerance: Relative closure tolerance used.
    """
    t: float
    splits: dict[str, CancellationSplit] = field(default_factory=dict)
    structure: dict[str, float] = field(default_factory=dict)
    tolerance: float = CLOSURE_TOLERANCE
    header: Optional[SnapshotHeader] = None

    @property
    def failures(self) -> list[str]:
        return [name for name, split in self.splits.items() if not split.closes(self.tolerance)]

    @property
    def ok(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "ok": self.ok,
            "tolerance": self.tolerance,
            "splits": {
                name: {
                    "lhs": s.lhs,
                    "dissipative": s.dissipative,
                    "remainder": s.remainder,
                    "remainder_direct": s.remainder_direct,
                    "closure_error": s.closure_error,
                }
                for name, s in self.splits.items()
            },
            "structure": self.structure,
        }


def check_state(state: Union[DAState, DoiState], eta: float = 1.0,
                tolerance: float = CLOSURE_TOLERANCE) -> IdentityReport:
    """Evaluate both cancellation splits of the state's model."""
    report = IdentityReport(t=state.t, tolerance=tolerance)
    if isinstance(state, DAState):
        report.splits["da"] = cancellation_split_da(state.u, state.A, eta)
        report.splits["da_high"] = cancellation_split_da_high(state.u, state.A, eta)
        structure = conformation_structure(state.A)
        report.structure.update(min_det=structure.min_det, max_trace_dev=structure.max_trace_dev)
    else:
        if state.J >= 4:
            report.splits["doi"] = cancellation_split_doi(state.u, state.f, eta)
            report.splits["doi_high"] = cancellation_split_doi_high(state.u, state.f, eta)
        else:
            logger.warning(f"Doi splits need J >= 4, snapshot has J={state.J}")
        toeplitz = toeplitz_realizability(trig_moments(state.f))
        report.structure.update(min_toeplitz_eig=float(np.min(toeplitz.min_eigenvalue.values)),
                                violation_count=float(toeplitz.violation_count))
    for name, split in report.splits.items():
        level = logging.INFO if split.closes(tolerance) else logging.ERROR
        logger.log(level, f"{name} split: lhs={split.lhs:.6e} dissipative={split.dissipative:.6e} "
                          f"remainder={split.remainder:.6e} closure={split.closure_error:.2e}")
    return report


def check_snapshot(path: Union[str, Path], eta: float = 1.0, tolerance: float = CLOSURE_TOLERANCE,
                   strict: bool = True) -> IdentityReport:
    """Validate a snapshot file and run the identity suite on its state.

    Moment dumps are only validated.

    Raises:
        SnapshotFormatError: if the file is malformed.
        IdentityClosureError: with ``strict`` when a split does not close.
    """
    snapshot = read_snapshot(path)
    if snapshot.header.kind.startswith("MOM"):
        return IdentityReport(t=snapshot.header.t, tolerance=tolerance, header=snapshot.header)
    report = check_state(state_from_snapshot(snapshot), eta, tolerance)
    report.header = snapshot.header
    if strict and not report.ok:
        raise IdentityClosureError(f"{path}: identities {', '.join(report.failures)} do not close "
                                   f"within {tolerance:.1e}")
    return report
