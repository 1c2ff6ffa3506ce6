"""Experiment drivers: η sweeps and convergence studies built from independent runs."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from core.errors import ConfigError
from core.models.config_data import RunConfig
from core.models.grid import TORUS_AREA, TWO_PI
from core.models.model_enum import ConvergenceAxis, ModelKind
from core.models.states import DAState, DoiState
from core.processing.spectral import resample_tensor, resample_vector
from core.services.simulation_manager import RunResult, SimulationManager, resample_complex

logger = logging.getLogger(__name__)

State = Union[DAState, DoiState]

SWEEP_COLUMNS = ("eta", "status", "exit_code", "t_final", "max_vorticity_norm", "min_det",
                 "max_energy_residual", "min_toeplitz_eig", "run_dir")


def _sweep_row(eta: float, result: RunResult) -> dict:
    stats = result.summary.get("stats", {})
    return {
        "eta": eta,
        "status": result.status,
        "exit_code": result.exit_code,
        "t_final": result.final_state.t,
        "max_vorticity_norm": stats.get("max_vorticity_norm"),
        "min_det": stats.get("min_det"),
        "max_energy_residual": stats.get("max_energy_residual"),
        "min_toeplitz_eig": stats.get("min_toeplitz_eig"),
        "run_dir": str(result.run_dir),
    }


def _run_eta(config: RunConfig, eta: float, run_dir: Path) -> dict:
    """One sweep member; failures become rows instead of exceptions."""
    try:
        member = config.updated(physics={"eta": eta}, run={"name": f"{config.run.name}-eta{eta:g}"})
        return _sweep_row(eta, SimulationManager(member, run_dir).run())
    except Exception as e:  # isolate one member from the rest of the sweep
        logger.error(f"Sweep member eta={eta:g} failed: {e}")
        row = dict.fromkeys(SWEEP_COLUMNS)
        row.update(eta=eta, status=f"error: {e}", exit_code=1, run_dir=str(run_dir))
        return row


def sweep_eta(config: RunConfig, etas: Sequence[float], workers: Optional[int] = 1) -> pd.DataFrame:
    """Independent runs for each η, written under ``output.dir/eta_<η>``, summarized in ``sweep.csv``.

    Args:
        config: Base configuration.
        etas: Viscous-stress parameters, at least one.
        workers: Processes to use; 1 runs in this process.
    """
    if not etas:
        raise ConfigError("sweep needs at least one eta", key="physics.eta")
    root = Path(config.output.dir)
    root.mkdir(parents=True, exist_ok=True)
    run_dirs = [root / f"eta_{eta:g}" for eta in etas]
    logger.info(f"Sweeping eta over {list(etas)} with {workers} worker(s)")
    if workers == 1 or len(etas) == 1:
        rows = [_run_eta(config, eta, d) for eta, d in zip(etas, run_dirs)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_eta, [config] * len(etas), etas, run_dirs))
    frame = pd.DataFrame(rows, columns=list(SWEEP_COLUMNS))
    frame.to_csv(root / "sweep.csv", index=False)
    return frame


def _modes_norm_squared(modes: np.ndarray) -> float:
    """∫∫|f|² dθ dx from θ-modes j = 0..J (negative modes by symmetry)."""
    weights = np.full(modes.shape[0], 2.0)
    weights[0] = 1.0
    return float(TWO_PI * TORUS_AREA * np.sum(weights[:, None, None] * np.abs(modes) ** 2) / modes[0].size)


def state_distance(a: State, b: State) -> float:
    """L² distance between two states of one model, measured on the grid and angular cutoff of ``a``.

    ``b`` is resampled onto a's grid and its angular modes truncated or zero-extended to a.J.
    """
    grid = a.grid
    du = a.u - resample_vector(b.u, grid)
    total = du.norm_squared()
    if isinstance(a, DAState):
        total += (a.A - resample_tensor(b.A, grid)).norm_squared()
        return math.sqrt(total)
    other = b.f.with_modes(a.J)
    modes = other.coefficients
    if other.grid.shape != grid.shape:
        modes = np.stack([resample_complex(c, other.grid, grid) for c in modes])
    total += _modes_norm_squared(a.f.coefficients - modes)
    return math.sqrt(total)


def _axis_config(config: RunConfig, axis: ConvergenceAxis, value: float) -> RunConfig:
    if axis is ConvergenceAxis.DT:
        return config.updated(time={"dt": float(value)})
    if axis is ConvergenceAxis.GRID:
        return config.updated(grid={"nx": int(value), "ny": int(value)})
    if axis is ConvergenceAxis.J:
        return config.updated(solver={"theta_modes": int(value)})
    return config.updated(solver={"galerkin_ell": int(value)})


def _finest(axis: ConvergenceAxis, values: Sequence[float]) -> float:
    return min(values) if axis is ConvergenceAxis.DT else max(values)


def convergence_study(config: RunConfig, axis: ConvergenceAxis, values: Sequence[float]) -> pd.DataFrame:
    """Final-state L² differences of each run against the finest one along an axis.

    The ``order`` column is the log-log slope between consecutive non-reference rows;
    for the dt axis it estimates the temporal order.

    Raises:
        ConfigError: with fewer than three values or a J axis on a DA run.
    """
    if len(values) < 3:
        raise ConfigError(f"convergence study needs at least 3 values, got {len(values)}", key=axis.value)
    if axis is ConvergenceAxis.J and config.model is not ModelKind.DOI:
        raise ConfigError("the J axis applies to Doi runs only", key="solver.theta_modes")
    root = Path(config.output.dir)
    root.mkdir(parents=True, exist_ok=True)
    ordered = sorted(values, reverse=axis is not ConvergenceAxis.DT)
    finest = _finest(axis, ordered)
    results: dict[float, RunResult] = {}
    for value in ordered:
        member = _axis_config(config, axis, value)
        results[value] = SimulationManager(member, root / f"{axis.value}_{value:g}").run()
    reference = results[finest]
    rows = []
    for value in ordered:
        result = results[value]
        difference = math.nan
        if result.ok and reference.ok:
            difference = 0.0 if value == finest else state_distance(result.final_state, reference.final_state)
        rows.append({"axis": axis.value, "value": value, "status": result.status, "difference": difference})
    frame = pd.DataFrame(rows)
    frame["order"] = _orders(frame["value"].to_numpy(float), frame["difference"].to_numpy(float))
    frame.to_csv(root / f"convergence_{axis.value}.csv", index=False)
    logger.info(f"Convergence study over {axis.value}:\n{frame.to_string(index=False)}")
    return frame


def _orders(values: np.ndarray, differences: np.ndarray) -> np.ndarray:
    orders = np.full(values.shape, np.nan)
    for i in range(1, len(values)):
        a, b = differences[i - 1], differences[i]
        if a > 0.0 and b > 0.0 and values[i] != values[i - 1]:
            orders[i] = math.log(a / b) / math.log(values[i - 1] / values[i])
    return orders


def is_monotone_decreasing(differences: Sequence[float]) -> bool:
    """True when the finite differences shrink strictly along the sequence."""
    finite = [d for d in differences if math.isfinite(d) and d > 0.0]
    return all(b < a for a, b in zip(finite, finite[1:]))
