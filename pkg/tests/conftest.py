"""Shared fixtures: desk-scale grids and band-limited states."""
import numpy as np
import pytest

from core.models.config_data import RunConfig
from core.models.fields import ScalarField, VectorField
from core.models.grid import Grid
from core.models.states import AngularDistribution, DAParams, DAState, DoiParams, DoiState
from core.processing.initial_conditions import perturbed_conformation, random_band_field, random_velocity


@pytest.fixture
def grid() -> Grid:
    return Grid(nx=16, ny=16)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def da_params() -> DAParams:
    return DAParams(eta=1.0, k=1.0, nu=1.0, dt=1e-3)


@pytest.fixture
def doi_params() -> DoiParams:
    return DoiParams(eta=1.0, k=1.0, nu=1.0, dt=1e-3)


def make_da_state(grid: Grid, rng: np.random.Generator, band: int = 2, amplitude: float = 0.5,
                  perturbation: float = 0.2) -> DAState:
    """Random resolved DA state: band-limited u and A with Tr A = 1, det A > 0."""
    u = random_velocity(grid, rng, band, amplitude)
    A = perturbed_conformation(grid, random_band_field(grid, rng, band), random_band_field(grid, rng, band),
                               perturbation)
    return DAState(u, A)


def make_doi_state(grid: Grid, rng: np.random.Generator, J: int = 8, band: int = 2,
                   amplitude: float = 0.5, size: float = 0.05) -> DoiState:
    """Random resolved Doi state: f = 1 plus small band-limited modes up to J."""
    u = random_velocity(grid, rng, band, amplitude)
    coefficients = np.zeros((J + 1,) + grid.shape, dtype=np.complex128)
    coefficients[0] = 1.0 + size * random_band_field(grid, rng, band).values
    for j in range(1, J + 1):
        scale = size / j
        coefficients[j] = scale * (random_band_field(grid, rng, band).values
                                   + 1j * random_band_field(grid, rng, band).values)
    return DoiState(u, AngularDistribution(grid, coefficients))


@pytest.fixture
def da_state(grid, rng) -> DAState:
    return make_da_state(grid, rng)


@pytest.fixture
def doi_state(grid, rng) -> DoiState:
    return make_doi_state(grid, rng)


@pytest.fixture
def da_config(tmp_path) -> RunConfig:
    """Equilibrium DA run on a 16² grid, a handful of steps."""
    return RunConfig(
        run={"model": "da", "name": "da-test"},
        grid={"nx": 16, "ny": 16},
        time={"dt": 1e-3, "t_end": 5e-3},
        output={"dir": str(tmp_path / "da-run")},
    )


@pytest.fixture
def tg_config(tmp_path) -> RunConfig:
    """Taylor-Green DA run on a 16² grid."""
    return RunConfig(
        run={"model": "da", "name": "tg-test", "seed": 3},
        grid={"nx": 16, "ny": 16},
        time={"dt": 1e-3, "t_end": 2e-2},
        init={"preset": "taylor_green", "amplitude": 1.0, "perturbation": 0.2},
        output={"dir": str(tmp_path / "tg-run"), "toeplitz_every": 1},
    )


@pytest.fixture
def doi_config(tmp_path) -> RunConfig:
    return RunConfig(
        run={"model": "doi", "name": "doi-test"},
        grid={"nx": 16, "ny": 16},
        time={"dt": 1e-3, "t_end": 5e-3},
        init={"preset": "taylor_green", "amplitude": 0.5, "kappa": 1.0},
        output={"dir": str(tmp_path / "doi-run"), "toeplitz_every": 1},
        solver={"theta_modes": 8},
    )


def sample_field(grid: Grid, func) -> ScalarField:
    return ScalarField.from_function(grid, func)


def sample_vector(grid: Grid, f1, f2) -> VectorField:
    return VectorField(sample_field(grid, f1), sample_field(grid, f2))
