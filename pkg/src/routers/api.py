"""Main API router aggregating all sub-routers.

The run history service is read-only: it lists finished runs and serves their
summaries, ledger rows and rendered graphs.
"""

from fastapi import APIRouter

from routers import history

router = APIRouter()

# include sub-routers
router.include_router(history.router)
