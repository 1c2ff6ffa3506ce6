from contextlib import asynccontextmanager
import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.services.run_history import RunHistory
from routers.api import router as api_router
from schemas import AppHealthOK

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Service settings, overridable with ``RODFLOW_APP_NAME``, ``RODFLOW_STORAGE_ROOT`` and ``RODFLOW_DEBUG``."""
    model_config = SettingsConfigDict(env_prefix="RODFLOW_")

    app_name: str = "Rodflow Run History API"
    debug: bool = False
    storage_root: str = "storage"


settings = Settings()


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Scan the storage root once at startup; endpoints rescan on every request."""
    app.state.run_history.reload_history()
    logger.info(f"Serving {len(app.state.run_history.runs)} runs from {settings.storage_root}")
    yield


app = FastAPI(title=settings.app_name, debug=settings.debug, lifespan=lifespan)
app.state.run_history = RunHistory(settings.storage_root)
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET"],
    allow_headers=["*"],
)


@app.get("/", tags=["meta"])
async def read_root() -> dict[str, str]:
    return {"message": settings.app_name}


@app.get("/health", tags=["meta"], response_model=AppHealthOK)
async def healthcheck() -> AppHealthOK:
    return AppHealthOK(status="ok", app=settings.app_name, storage_root=str(app.state.run_history.storage_root))


# mount API router under /api
app.include_router(api_router, prefix="/api")
logging.getLogger("uvicorn.access").setLevel(logging.WARNING)
