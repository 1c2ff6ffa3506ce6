"""API Response Schemas.

This module defines Pydantic models for the run history API: health checks,
run listings, run summaries and diagnostics rows.
"""

from typing import Any, List, Optional

from pydantic import BaseModel


class AppHealthOK(BaseModel):
    """Application-level health check response.

    Attributes:
        status: Health status as string.
        app: Application name.
        storage_root: Directory scanned for runs.
    """
    status: str
    app: str
    storage_root: str


class HistoryList(BaseModel):
    """Names of the finished runs, newest first.

    Attributes:
        list: Run names, relative to the storage root.
    """
    list: List[str]


class RunStats(BaseModel):
    max_vorticity_norm: Optional[float] = None
    max_energy_residual: Optional[float] = None
    min_det: Optional[float] = None
    max_trace_dev: Optional[float] = None
    min_toeplitz_eig: Optional[float] = None
    max_m0: Optional[float] = None


class RunSummary(BaseModel):
    """Contents of a run's ``summary.json``.

    Attributes:
        name: Run name from the configuration.
        model: ``da`` or ``doi``.
        status: ``ok`` or the failure that stopped the run.
        exit_code: CLI exit code of the run.
        t_final: Time of the last good state.
        version: Version string of the code that produced the run.
        config: Echo of the validated configuration.
    """
    name: str
    model: str
    status: str
    exit_code: int
    t_final: float
    steps: int
    version: str
    started: str
    stats: RunStats
    config: dict[str, Any]


class DiagnosticsRows(BaseModel):
    """Ledger columns of a run, one list per column; missing values are null.

    Attributes:
        columns: Column names in CSV order.
        rows: One list of values per sampled step.
    """
    columns: List[str]
    rows: List[List[Optional[float]]]
