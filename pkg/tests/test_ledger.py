"""
Tests for the norm ledger rows.
"""
import math

import pytest

from core.models.diagnostics_data import DA_COLUMNS, DOI_COLUMNS, SHARED_COLUMNS, DiagnosticsRecord, columns
from core.models.grid import TORUS_AREA, TWO_PI
from core.models.model_enum import ModelKind
from core.models.states import DAState, DoiState
from core.processing.ledger import da_ledger, doi_ledger, norm_ledger


class TestDALedger:
    def test_equilibrium(self, grid, da_params):
        record = da_ledger(DAState.equilibrium(grid), da_params)
        assert record.min_det == pytest.approx(0.25)
        assert record.max_trace_dev == 0.0
        assert record.kinetic_energy == 0.0
        assert record.visc_dissipation == 0.0
        assert record.grad_A_norm == pytest.approx(0.0, abs=1e-12)
        assert math.isnan(record.mass)

    def test_split_dissipation(self, da_state, da_params):
        record = da_ledger(da_state, da_params, with_splits=True)
        assert record.high_dissipation <= 0.0
        assert record.enstrophy == pytest.approx(record.vorticity_norm**2)

    def test_dispatch(self, da_state, da_params):
        assert norm_ledger(da_state, da_params).min_det == da_ledger(da_state, da_params).min_det


class TestDoiLedger:
    def test_equilibrium(self, grid, doi_params):
        record = doi_ledger(DoiState.equilibrium(grid, 8), doi_params)
        assert record.mass == pytest.approx(TWO_PI * TORUS_AREA)
        assert record.free_energy == pytest.approx(0.0, abs=1e-12)
        assert record.min_toeplitz_eig == pytest.approx(TWO_PI)
        assert record.violation_count == 0
        assert record.moment_bound_violation < 0.0
        assert record.elastic_stress_w12 == 0.0
        assert math.isnan(record.min_det)

    def test_low_cutoff_leaves_higher_moments_empty(self, grid, doi_params):
        record = doi_ledger(DoiState.equilibrium(grid, 2), doi_params)
        assert math.isnan(record.visc_dissipation)
        assert math.isnan(record.m4_w22)
        assert math.isnan(record.m6_w12)

    def test_toeplitz_optional(self, doi_state, doi_params):
        record = doi_ledger(doi_state, doi_params, with_toeplitz=False)
        assert math.isnan(record.min_toeplitz_eig)

    def test_split_dissipation(self, doi_state, doi_params):
        assert doi_ledger(doi_state, doi_params, with_splits=True).high_dissipation <= 0.0


class TestRecord:
    def test_row_restricted_to_model(self, grid, da_params):
        record = da_ledger(DAState.equilibrium(grid), da_params)
        assert tuple(record.as_row(ModelKind.DA)) == columns(ModelKind.DA)
        assert tuple(record.as_row(ModelKind.DOI)) == SHARED_COLUMNS + DOI_COLUMNS

    def test_columns_cover_record(self):
        assert len(SHARED_COLUMNS + DA_COLUMNS + DOI_COLUMNS) == len(DiagnosticsRecord.__dataclass_fields__)
