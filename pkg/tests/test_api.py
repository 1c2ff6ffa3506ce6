"""
Tests for the run history API.

Validates:
- listing and summaries of finished runs
- ledger rows with column selection and null for missing values
- PNG graphs and the error responses for unknown runs and kinds
"""
import pytest
from fastapi.testclient import TestClient

from core.services.run_history import RunHistory
from core.services.simulation_manager import run
from main import app
from routers.history import get_run_history


@pytest.fixture
def client(da_config, tmp_path):
    run(da_config)
    history = RunHistory(tmp_path)
    app.dependency_overrides[get_run_history] = lambda: history
    yield TestClient(app)
    app.dependency_overrides.clear()


class TestRuns:
    def test_list(self, client):
        response = client.get("/api/runs")
        assert response.status_code == 200
        assert response.json() == {"list": ["da-run"]}

    def test_summary(self, client):
        response = client.get("/api/runs/da-run/summary")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["model"] == "da"
        assert body["stats"]["min_det"] == pytest.approx(0.25)

    def test_unknown_run(self, client):
        assert client.get("/api/runs/missing/summary").status_code == 404
        assert client.get("/api/runs/missing/diagnostics").status_code == 404
        assert client.get("/api/runs/missing/graph/diagnostics").status_code == 404


class TestDiagnostics:
    def test_all_columns(self, client):
        body = client.get("/api/runs/da-run/diagnostics").json()
        assert body["columns"][0] == "t"
        assert "min_det" in body["columns"]
        assert len(body["rows"]) == 6
        residual = body["columns"].index("energy_residual")
        assert body["rows"][0][residual] is None

    def test_selected_columns(self, client):
        response = client.get("/api/runs/da-run/diagnostics", params={"columns": ["min_det", "unknown"]})
        body = response.json()
        assert body["columns"] == ["t", "min_det"]
        assert all(row[1] == pytest.approx(0.25) for row in body["rows"])


class TestGraphs:
    @pytest.mark.parametrize("kind", ["diagnostics", "vorticity"])
    def test_png(self, client, kind):
        response = client.get(f"/api/runs/da-run/graph/{kind}")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"
        assert response.content.startswith(b"\x89PNG")

    def test_unknown_kind(self, client):
        response = client.get("/api/runs/da-run/graph/pressure")
        assert response.status_code == 400


class TestMeta:
    def test_health(self, client):
        response = client.get("/health")
        assert response.status_code == 200
        assert response.json()["status"] == "ok"
