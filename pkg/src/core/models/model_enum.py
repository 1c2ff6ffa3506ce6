"""Enumerations for type-safe references to models, schemes and run options."""
from enum import Enum


class ModelKind(Enum):
    """Which system is being integrated."""
    DA = "da"
    DOI = "doi"

    @property
    def snapshot_tag(self) -> str:
        return self.name


class TimeScheme(Enum):
    """Integrator tag.

    CNAB2: Crank-Nicolson on the diagonal linear part, second-order Adams-Bashforth on the
    explicit terms, first step by the Crank-Nicolson/Heun pair.
    CNHEUN: the Crank-Nicolson/Heun pair on every step.
    """
    CNAB2 = "cnab2"
    CNHEUN = "cnheun"


class StressDealias(Enum):
    """Dealiasing rule applied to the cubic DA stress product (∇u:A)A."""
    TWO_THIRDS = "two_thirds"
    HALF = "half"

    @property
    def fraction(self) -> float:
        return 2.0 / 3.0 if self is StressDealias.TWO_THIRDS else 0.5


class ViolationPolicy(Enum):
    """What the runner does when a monitored structural invariant fails."""
    WARN = "warn"
    ABORT = "abort"


class ConvergenceAxis(Enum):
    """Parameter varied by a convergence study."""
    DT = "dt"
    GRID = "grid"
    J = "J"
    ELL = "ell"


class InitPreset(Enum):
    """Named initial conditions."""
    EQUILIBRIUM = "equilibrium"
    TAYLOR_GREEN = "taylor_green"
    RELAXATION = "relaxation"
    RANDOM = "random"
    UNIFORM = "uniform"
    VON_MISES = "von_mises"
    SNAPSHOT = "snapshot"


DA_PRESETS = frozenset({
    InitPreset.EQUILIBRIUM,
    InitPreset.TAYLOR_GREEN,
    InitPreset.RELAXATION,
    InitPreset.RANDOM,
    InitPreset.SNAPSHOT,
})

DOI_PRESETS = frozenset({
    InitPreset.EQUILIBRIUM,
    InitPreset.TAYLOR_GREEN,
    InitPreset.UNIFORM,
    InitPreset.VON_MISES,
    InitPreset.RANDOM,
    InitPreset.SNAPSHOT,
})
