"""Run configuration models.

A run is described by an INI file with one section per model below. Values from the
environment (``RODFLOW_<SECTION>__<KEY>``) override the file.
"""
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from core.errors import ConfigError
from core.models.grid import TWO_PI, Grid
from core.models.model_enum import (
    DA_PRESETS,
    DOI_PRESETS,
    InitPreset,
    ModelKind,
    StressDealias,
    TimeScheme,
    ViolationPolicy,
)
from core.models.states import DAParams, DoiParams


def config_error(error: ValidationError) -> ConfigError:
    """First validation failure as a ConfigError naming ``section.key``."""
    first = error.errors()[0]
    cause = first.get("ctx", {}).get("error")
    if isinstance(cause, ConfigError):
        return cause
    key = ".".join(str(part) for part in first["loc"]) or None
    return ConfigError(first["msg"], key=key)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RunSection(_Section):
    """Attributes:
        model: Which system to integrate.
        name: Label echoed into the summary.
        seed: Seed of the random initial conditions.
    """
    model: ModelKind = ModelKind.DA
    name: str = "run"
    seed: int = 0


class GridSection(_Section):
    nx: int = 64
    ny: int = 64
    dealias_fraction: float = Field(default=2.0 / 3.0, gt=0.0, le=1.0)


class PhysicsSection(_Section):
    """Attributes:
        eta: Viscous-stress concentration.
        k: Rotational diffusivity.
        nu: Spatial diffusivity of the rods.
        stress_dealias: Dealiasing rule of the cubic DA stress.
        tol_trace: DA trace drift that triggers a warning.
        tol_neg: Relative negativity tolerance of the reconstructed Doi density.
    """
    eta: float = Field(default=1.0, ge=0.0)
    k: float = Field(default=1.0, gt=0.0)
    nu: float = Field(default=1.0, gt=0.0)
    stress_dealias: StressDealias = StressDealias.TWO_THIRDS
    tol_trace: float = Field(default=1e-8, gt=0.0)
    tol_neg: float = Field(default=1e-8, ge=0.0)


class TimeSection(_Section):
    dt: float = Field(default=1e-3, gt=0.0)
    t_end: float = Field(default=1.0, gt=0.0)
    cfl_safety: float = Field(default=0.5, gt=0.0, le=1.0)
    scheme: TimeScheme = TimeScheme.CNAB2
    enforce_stability: bool = True


class InitSection(_Section):
    """Initial condition preset and its parameters.

    Attributes:
        preset: Named initial condition.
        amplitude: Velocity amplitude.
        perturbation: Size of the anisotropic perturbation of A or of M₀.
        a0: A₁₁ of the constant relaxation preset.
        kappa: Concentration of the von Mises orientation density.
        mass: Spatial mean of M₀.
        band: Largest wavenumber of random fields.
        snapshot: Snapshot file for the ``snapshot`` preset.
    """
    preset: InitPreset = InitPreset.EQUILIBRIUM
    amplitude: float = 1.0
    perturbation: float = Field(default=0.1, ge=0.0)
    a0: float = Field(default=0.8, gt=0.0, lt=1.0)
    kappa: float = Field(default=1.0, ge=0.0)
    mass: float = Field(default=TWO_PI, gt=0.0)
    band: int = Field(default=4, ge=1)
    snapshot: Optional[Path] = None


class OutputSection(_Section):
    """Attributes:
        dir: Run directory.
        snapshot_every: Simulated time between snapshots; 0 writes only the final state.
        diagnostics_every: Steps between ledger rows.
        toeplitz_every: Steps between Toeplitz checks (Doi).
        splits: Also record the high-order cancellation split in the ledger.
        policy: What a structural violation does.
        history: States kept for the centered-difference audits.
    """
    dir: Path = Path("storage/run")
    snapshot_every: float = Field(default=0.0, ge=0.0)
    diagnostics_every: int = Field(default=1, ge=1)
    toeplitz_every: int = Field(default=10, ge=1)
    splits: bool = False
    policy: ViolationPolicy = ViolationPolicy.WARN
    history: int = Field(default=3, ge=3)


class SolverSection(_Section):
    galerkin_ell: Optional[int] = Field(default=None, ge=1)
    theta_modes: Optional[int] = Field(default=None, ge=4)
    transform_workers: int = Field(default=1, ge=1)


class RunConfig(BaseSettings):
    """Validated run configuration."""
    model_config = SettingsConfigDict(
        env_prefix="RODFLOW_",
        env_nested_delimiter="__",
        extra="forbid",
        frozen=True,
    )

    run: RunSection = RunSection()
    grid: GridSection = GridSection()
    physics: PhysicsSection = PhysicsSection()
    time: TimeSection = TimeSection()
    init: InitSection = InitSection()
    output: OutputSection = OutputSection()
    solver: SolverSection = SolverSection()

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # environment first so it overrides the INI values passed as init kwargs
        return env_settings, init_settings

    @model_validator(mode="after")
    def _check_model_fields(self) -> "RunConfig":
        model = self.run.model
        if model is ModelKind.DOI and self.solver.theta_modes is None:
            raise ConfigError("Doi runs need the number of angular modes", key="solver.theta_modes")
        allowed = DA_PRESETS if model is ModelKind.DA else DOI_PRESETS
        if self.init.preset not in allowed:
            raise ConfigError(f"preset {self.init.preset.value!r} is not available for {model.value}",
                              key="init.preset")
        if self.init.preset is InitPreset.SNAPSHOT and self.init.snapshot is None:
            raise ConfigError("snapshot preset needs a file", key="init.snapshot")
        try:
            self.make_grid()
        except ValueError as e:
            raise ConfigError(str(e), key="grid.nx") from e
        return self

    @property
    def model(self) -> ModelKind:
        return self.run.model

    @property
    def theta_modes(self) -> int:
        return self.solver.theta_modes or 0

    def make_grid(self) -> Grid:
        return Grid(nx=self.grid.nx, ny=self.grid.ny, dealias_fraction=self.grid.dealias_fraction)

    def make_params(self) -> Union[DAParams, DoiParams]:
        """Physical and stepping parameters for the configured model."""
        shared = dict(
            eta=self.physics.eta,
            k=self.physics.k,
            nu=self.physics.nu,
            dt=self.time.dt,
            scheme=self.time.scheme,
            galerkin_ell=self.solver.galerkin_ell,
            cfl_safety=self.time.cfl_safety,
            enforce_stability=self.time.enforce_stability,
        )
        if self.model is ModelKind.DA:
            return DAParams(**shared, stress_dealias=self.physics.stress_dealias, tol_trace=self.physics.tol_trace)
        return DoiParams(**shared, tol_neg=self.physics.tol_neg)

    def updated(self, **sections: dict) -> "RunConfig":
        """Copy with some keys of some sections replaced, e.g. ``updated(physics={"eta": 10})``."""
        data = self.model_dump()
        for section, values in sections.items():
            data[section] = {**data[section], **values}
        try:
            return RunConfig.model_validate(data)
        except ValidationError as e:
            raise config_error(e) from e
