import math
from typing import Optional

from fastapi import APIRouter, Depends, HTTPException, Query, Request
from fastapi.responses import Response

from core.services.run_history import GRAPH_FILES, RunHistory
from schemas import DiagnosticsRows, HistoryList, RunSummary

router = APIRouter(prefix="/runs", tags=["runs"])

NOT_FOUND = {
    404: {
        "description": "Run not found.",
        "content": {
            "application/json": {
                "example": {"detail": "Run 'taylor-green' not found"}
            }
        }
    }
}


def get_run_history(request: Request) -> RunHistory:
    """The history bound to the application in ``main.py``."""
    return request.app.state.run_history


@router.get("", response_model=HistoryList)
async def list_runs(history: RunHistory = Depends(get_run_history)) -> HistoryList:
    """
    List all finished runs (newest first).
    """
    return HistoryList(list=history.list_runs())


@router.get("/{name:path}/summary", response_model=RunSummary, responses=NOT_FOUND)
async def get_run_summary(name: str, history: RunHistory = Depends(get_run_history)) -> RunSummary:
    """
    Get the summary of a run: status, version string, statistics and config echo.
    """
    summary = history.get_summary(name)
    if summary is None:
        raise HTTPException(status_code=404, detail=f"Run '{name}' not found")
    return RunSummary(**summary)


@router.get("/{name:path}/diagnostics", response_model=DiagnosticsRows, responses=NOT_FOUND)
async def get_run_diagnostics(
    name: str,
    columns: Optional[list[str]] = Query(None, description="Ledger columns to return besides t"),
    history: RunHistory = Depends(get_run_history),
) -> DiagnosticsRows:
    """
    Get the ledger rows of a run.
    """
    frame = history.get_diagnostics(name, columns)
    if frame is None:
        raise HTTPException(status_code=404, detail=f"Run '{name}' not found")
    rows = [[None if isinstance(v, float) and not math.isfinite(v) else float(v) for v in row]
            for row in frame.itertuples(index=False)]
    return DiagnosticsRows(columns=list(frame.columns), rows=rows)


@router.get("/{name:path}/graph/{kind}", response_class=Response, responses={
    **NOT_FOUND,
    400: {
        "description": "Unknown graph kind.",
        "content": {
            "application/json": {
                "example": {"detail": "kind must be one of diagnostics, vorticity"}
            }
        }
    }
})
async def get_run_graph(name: str, kind: str, history: RunHistory = Depends(get_run_history)) -> Response:
    """
    Get a rendered graph of a run as PNG image.

    Args:
        kind: ``diagnostics`` for the ledger time series, ``vorticity`` for the final vorticity map.
    """
    if kind not in GRAPH_FILES:
        raise HTTPException(status_code=400, detail=f"kind must be one of {', '.join(GRAPH_FILES)}")
    png = history.get_graph(name, kind)
    if png is None:
        raise HTTPException(status_code=404, detail=f"Graph '{kind}' of run '{name}' not found")
    return Response(content=png, media_type="image/png")
