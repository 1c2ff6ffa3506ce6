"""
Tests for the identity suite run on states and snapshot files.
"""
import json

import pytest

from core.errors import IdentityClosureError, SnapshotFormatError
from core.processing.moments import moment_tensor
from core.services.identity_checker import check_snapshot, check_state
from core.services.snapshot_io import write_moment_snapshot, write_snapshot
from tests.conftest import make_doi_state


class TestCheckState:
    def test_da_state(self, da_state):
        report = check_state(da_state, eta=1.5)
        assert set(report.splits) == {"da", "da_high"}
        assert report.ok
        assert report.structure["min_det"] > 0.0
        assert report.splits["da_high"].dissipative <= 0.0

    def test_doi_state(self, doi_state):
        report = check_state(doi_state)
        assert set(report.splits) == {"doi", "doi_high"}
        assert report.ok
        assert report.structure["violation_count"] == 0.0

    def test_doi_without_enough_modes(self, grid, rng, caplog):
        report = check_state(make_doi_state(grid, rng, J=2))
        assert report.splits == {}
        assert "need J >= 4" in caplog.text
        assert "min_toeplitz_eig" in report.structure


class TestCheckSnapshot:
    def test_da_snapshot(self, da_state, tmp_path):
        path = write_snapshot(tmp_path / "state.bin", da_state)
        report = check_snapshot(path)
        assert report.ok
        assert report.header.kind == "DA"
        json.dumps(report.as_dict())

    def test_report_dict(self, da_state, tmp_path):
        report = check_snapshot(write_snapshot(tmp_path / "state.bin", da_state))
        data = report.as_dict()
        assert data["ok"] is True
        assert set(data["splits"]["da"]) == {"lhs", "dissipative", "remainder", "remainder_direct",
                                             "closure_error"}

    def test_moment_snapshot_is_only_validated(self, doi_state, tmp_path):
        path = write_moment_snapshot(tmp_path / "m4.bin", moment_tensor(doi_state.f, 4), 0.5)
        report = check_snapshot(path)
        assert report.splits == {}
        assert report.t == 0.5
        assert report.header.order == 4

    def test_strict_failure(self, da_state, tmp_path):
        path = write_snapshot(tmp_path / "state.bin", da_state)
        with pytest.raises(IdentityClosureError) as e:
            check_snapshot(path, tolerance=-1.0)
        assert e.value.exit_code == 4

    def test_lenient_failure(self, da_state, tmp_path):
        path = write_snapshot(tmp_path / "state.bin", da_state)
        report = check_snapshot(path, tolerance=-1.0, strict=False)
        assert report.failures == ["da", "da_high"]

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"not a snapshot")
        with pytest.raises(SnapshotFormatError):
            check_snapshot(path)
