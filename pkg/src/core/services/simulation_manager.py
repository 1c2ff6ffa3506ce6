"""Single-run orchestration: initial state, time loop, monitoring and run artifacts.

A run directory receives

- ``config.ini``: the configuration echo,
- ``snapshot_XXXX.bin`` every ``snapshot_every`` units of simulated time and ``final.bin``,
- ``last_good.bin`` when the run stops on a blowup or an abort,
- ``diagnostics.csv``: one ledger row per sampled step,
- ``summary.json``: status, version string and run statistics,
- ``diagnostics.png`` and ``vorticity.png``.
"""
import datetime
import importlib.metadata
import json
import logging
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from core.config_loader import dump_config
from core.errors import InsufficientDataError, RodflowError, StructuralViolationError
from core.models.circular_buffer import StateHistory
from core.models.config_data import RunConfig
from core.models.diagnostics_data import DiagnosticsRecord, columns
from core.models.fields import ScalarField, set_transform_workers
from core.models.grid import Grid
from core.models.model_enum import InitPreset, ModelKind, ViolationPolicy
from core.models.states import AngularDistribution, DAState, DoiState
from core.processing.closure_da import DAIntegrator, da_energy_budget, det_evolution_residual
from core.processing.graphique import field_image, stacked_graphiques
from core.processing.initial_conditions import da_initial_state, doi_initial_state
from core.processing.kinetic_doi import DoiIntegrator, free_energy, free_energy_dissipation
from core.processing.ledger import norm_ledger
from core.processing.spectral import resample, resample_tensor, resample_vector, vorticity
from core.services.snapshot_io import load_state, write_snapshot

logger = logging.getLogger(__name__)

State = Union[DAState, DoiState]

GRAPHED_COLUMNS = {
    ModelKind.DA: ("kinetic_energy", "enstrophy", "energy_residual", "min_det", "max_trace_dev"),
    ModelKind.DOI: ("kinetic_energy", "free_energy", "m0_max", "min_toeplitz_eig", "energy_residual"),
}


def version_string() -> str:
    """``git describe`` of the source tree, else the installed package version."""
    try:
        described = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        ).stdout.strip()
        if described:
            return described
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return f"rodflow-{importlib.metadata.version('rodflow')}"
    except importlib.metadata.PackageNotFoundError:
        return "rodflow-unknown"


@dataclass
class RunResult:
    """Outcome of :meth:`SimulationManager.run`.

    Attributes:
        run_dir: Directory holding the artifacts.
        status: ``ok``, or the class of the error that stopped the run.
        exit_code: 0 on success, the error's exit code otherwise.
        final_state: Last state that passed every check.
        diagnostics: Ledger rows as a DataFrame.
        summary: Contents of ``summary.json``.
    """
    run_dir: Path
    status: str
    exit_code: int
    final_state: State
    diagnostics: pd.DataFrame
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


def _restart_state(config: RunConfig, grid: Grid) -> State:
    state = load_state(config.init.snapshot, grid.dealias_fraction)
    expected = DAState if config.model is ModelKind.DA else DoiState
    if not isinstance(state, expected):
        raise RodflowError(f"snapshot {config.init.snapshot} does not hold a {config.model.value} state")
    if state.grid.shape != grid.shape:
        logger.warning(f"Resampling snapshot from {state.grid.nx}x{state.grid.ny} to {grid.nx}x{grid.ny}")
        u = resample_vector(state.u, grid)
        if isinstance(state, DAState):
            return DAState(u, resample_tensor(state.A, grid), t=state.t)
        modes = np.stack([resample_complex(c, state.grid, grid) for c in state.f.coefficients])
        return DoiState(u, AngularDistribution(grid, modes).with_modes(config.theta_modes), t=state.t)
    if isinstance(state, DoiState) and state.J != config.theta_modes:
        logger.warning(f"Changing angular cutoff of the snapshot from J={state.J} to J={config.theta_modes}")
        return DoiState(state.u, state.f.with_modes(config.theta_modes), t=state.t)
    return state


def resample_complex(values: np.ndarray, source: Grid, target: Grid) -> np.ndarray:
    """Resample a complex field given by its values on ``source``."""
    real = resample(ScalarField(source, values=values.real), target).values
    imag = resample(ScalarField(source, values=values.imag), target).values
    return real + 1j * imag


def initial_state(config: RunConfig) -> State:
    """State at the start of the run for the configured preset."""
    grid = config.make_grid()
    if config.init.preset is InitPreset.SNAPSHOT:
        return _restart_state(config, grid)
    if config.model is ModelKind.DA:
        return da_initial_state(grid, config.init, config.run.seed)
    return doi_initial_state(grid, config.theta_modes, config.init, config.run.seed)


class SimulationManager:
    """Owns one simulation: its integrator, its history ring and its run directory."""

    def __init__(self, config: RunConfig, run_dir: Optional[Path] = None):
        self.config = config
        self.params = config.make_params()
        self.grid = config.make_grid()
        self.run_dir = Path(run_dir or config.output.dir)
        self.history = StateHistory(config.output.history)
        self.records: list[DiagnosticsRecord] = []
        self._toeplitz_failures = 0
        if config.model is ModelKind.DA:
            self.integrator = DAIntegrator(self.grid, self.params)
        else:
            self.integrator = DoiIntegrator(self.grid, config.theta_modes, self.params)

    # ------------------------------------------------------------------ audits

    def _energy_residual(self) -> tuple[float, float]:
        """(energy residual, det residual) centered on the previous step; NaN without history."""
        try:
            window = self.history.window(3)
        except InsufficientDataError:
            return math.nan, math.nan
        if not self.history.is_uniform():
            return math.nan, math.nan
        if self.config.model is ModelKind.DA:
            energy = da_energy_budget(window, self.params).max_abs
            det = det_evolution_residual(window, self.params).residual.max_abs()
            return energy, det
        before, middle, after = window
        try:
            rate = (free_energy(after, tol_neg=self.params.tol_neg).total
                    - free_energy(before, tol_neg=self.params.tol_neg).total) / (after.t - before.t)
            return abs(rate + free_energy_dissipation(middle, self.params)), math.nan
        except RodflowError as e:
            logger.warning(f"Free-energy budget skipped at t={middle.t:.4f}: {e}")
            return math.nan, math.nan

    def record(self, state: State) -> DiagnosticsRecord:
        with_toeplitz = state.step % self.config.output.toeplitz_every == 0
        record = norm_ledger(state, self.params, with_toeplitz=with_toeplitz,
                             with_splits=self.config.output.splits)
        record.energy_residual, record.det_residual = self._energy_residual()
        self.records.append(record)
        self._monitor(record)
        return record

    def _monitor(self, record: DiagnosticsRecord) -> None:
        """Apply the violation policy to det A ≤ 0 and to repeated Toeplitz failures."""
        message = None
        if self.config.model is ModelKind.DA and record.min_det <= 0.0:
            message = f"det A reached {record.min_det:.3e} at t={record.t:.4f}"
        elif not math.isnan(record.violation_count):
            self._toeplitz_failures = self._toeplitz_failures + 1 if record.violation_count > 0 else 0
            if self._toeplitz_failures >= 2:
                message = (f"Toeplitz realizability failed at {int(record.violation_count)} points "
                           f"on consecutive checks (t={record.t:.4f})")
        if message is None:
            return
        if self.config.output.policy is ViolationPolicy.ABORT:
            logger.error(f"Structural violation, aborting: {message}")
            raise StructuralViolationError(message)
        logger.warning(f"Structural violation: {message}")

    # ------------------------------------------------------------------ run loop

    def step_count(self, t0: float) -> int:
        span = self.config.time.t_end - t0
        steps = max(0, int(round(span / self.params.dt)))
        if abs(steps * self.params.dt - span) > 1e-9 * max(1.0, abs(span)):
            logger.warning(f"t_end - t0 = {span:.6g} is not a multiple of dt = {self.params.dt:.3g}; "
                           f"stopping after {steps} steps")
        return steps

    def run(self, state: Optional[State] = None) -> RunResult:
        """Integrate to t_end and write the run artifacts.

        Blowups, stability failures and aborts stop the loop; the last good state is saved
        and the result carries the error's exit code.
        """
        set_transform_workers(self.config.solver.transform_workers)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        (self.run_dir / "config.ini").write_text(dump_config(self.config))
        started = datetime.datetime.now()
        state = initial_state(self.config) if state is None else state
        logger.info(f"Run {self.config.run.name} started: {self.config.model.value} model, "
                    f"{self.grid.nx}x{self.grid.ny} grid, t0={state.t:.4g}, t_end={self.config.time.t_end:.4g}")

        every = self.config.output.snapshot_every
        tolerance = 1e-9 * self.params.dt
        next_snapshot = (math.floor((state.t + tolerance) / every) + 1) * every if every > 0 else math.inf
        snapshot_index = 0
        status, exit_code = "ok", 0
        last_good = state
        self.history.clear()
        self.records = []
        self._toeplitz_failures = 0
        self.history.push(state)
        try:
            self.record(state)
            for n in range(self.step_count(state.t)):
                state = self.integrator.step(state)
                self.history.push(state)
                last_good = state
                if state.step % self.config.output.diagnostics_every == 0:
                    self.record(state)
                if state.t >= next_snapshot - tolerance:
                    write_snapshot(self.run_dir / f"snapshot_{snapshot_index:04d}.bin", state)
                    snapshot_index += 1
                    next_snapshot += every
            if not self.records or self.records[-1].step != state.step:
                self.record(state)
        except RodflowError as e:
            status, exit_code = type(e).__name__, e.exit_code
            logger.error(f"Run {self.config.run.name} stopped: {e}")
            write_snapshot(self.run_dir / "last_good.bin", last_good)

        if exit_code == 0:
            write_snapshot(self.run_dir / "final.bin", last_good)
        frame = self.diagnostics_frame()
        frame.to_csv(self.run_dir / "diagnostics.csv", index=False)
        summary = self._summary(status, exit_code, last_good, frame, started)
        (self.run_dir / "summary.json").write_text(json.dumps(summary, indent=2, default=str))
        self._render(frame, last_good)
        logger.info(f"Run {self.config.run.name} finished with status {status} at t={last_good.t:.4g}")
        return RunResult(self.run_dir, status, exit_code, last_good, frame, summary)

    def diagnostics_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_row(self.config.model) for r in self.records],
                            columns=list(columns(self.config.model)))

    def _summary(self, status: str, exit_code: int, state: State, frame: pd.DataFrame,
                 started: datetime.datetime) -> dict:
        stats = {
            "max_vorticity_norm": _finite_max(frame["vorticity_norm"]),
            "max_energy_residual": _finite_max(frame["energy_residual"].abs()),
        }
        if self.config.model is ModelKind.DA:
            stats["min_det"] = _finite_min(frame["min_det"])
            stats["max_trace_dev"] = _finite_max(frame["max_trace_dev"])
        else:
            stats["min_toeplitz_eig"] = _finite_min(frame["min_toeplitz_eig"])
            stats["max_m0"] = _finite_max(frame["m0_max"])
        return {
            "name": self.config.run.name,
            "model": self.config.model.value,
            "status": status,
            "exit_code": exit_code,
            "t_final": state.t,
            "steps": state.step,
            "version": version_string(),
            "started": started.isoformat(timespec="seconds"),
            "stats": stats,
            "config": self.config.model_dump(mode="json"),
        }

    def _render(self, frame: pd.DataFrame, state: State) -> None:
        if frame.empty:
            return
        times = frame["t"].tolist()
        graphed = {name: frame[name].tolist() for name in GRAPHED_COLUMNS[self.config.model]}
        try:
            stacked_graphiques(times, graphed).save(self.run_dir / "diagnostics.png", format="PNG")
            field_image(vorticity(state.u)).save(self.run_dir / "vorticity.png", format="PNG")
        except OSError as e:
            logger.error(f"Failed to render run graphs: {e}")


def _finite_max(series: pd.Series) -> Optional[float]:
    value = series.replace([np.inf, -np.inf], np.nan).max()
    return None if pd.isna(value) else float(value)


def _finite_min(series: pd.Series) -> Optional[float]:
    value = series.replace([np.inf, -np.inf], np.nan).min()
    return None if pd.isna(value) else float(value)


def run(config: RunConfig, run_dir: Optional[Path] = None) -> RunResult:
    """Run one simulation from its configuration."""
    return SimulationManager(config, run_dir).run()
