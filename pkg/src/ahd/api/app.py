"""
AHD FastAPI Applications

Factories for the program database service and the evaluator service.
Under uvicorn both read the run config named by AHD_RUN_CONFIG:

    uvicorn --factory ahd.api.app:create_db_app --port 8100
    uvicorn --factory ahd.api.app:create_evaluator_app --port 8200
"""

import logging
import os
from contextlib import AbstractAsyncContextManager, asynccontextmanager
from typing import AsyncIterator, Callable, Optional

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from ahd import __version__
from ahd.config import RunConfig, load_run_config
from ahd.evolution import ProgramDatabase
from ahd.services.client import DbClient
from ahd.services.evaluator import Evaluator
from ahd.services.models import MessageKind, WireEnvelope
from ahd.services.orchestrator import prepare_database, save_snapshot

from .auth import require_api_key
from .logging_config import RequestLoggingMiddleware, configure_logging
from .metrics import MetricsMiddleware, get_metrics, get_metrics_content_type
from .routers import database, evaluator

logger = logging.getLogger(__name__)

Lifespan = Callable[[FastAPI], AbstractAsyncContextManager[None]]


def _base_app(title: str, service: str, lifespan: Optional[Lifespan] = None) -> FastAPI:
    app = FastAPI(
        title=title,
        version=__version__,
        docs_url="/docs",
        redoc_url="/redoc",
        lifespan=lifespan,
    )

    allowed_origins = os.getenv("AHD_CORS_ORIGINS", "http://localhost:3000").split(",")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=allowed_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.add_middleware(MetricsMiddleware)
    app.add_middleware(RequestLoggingMiddleware)

    @app.exception_handler(RequestValidationError)
    async def malformed_envelope(request: Request, exc: RequestValidationError) -> JSONResponse:
        """Malformed envelopes and query parameters are client errors (400)."""
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    @app.get("/v1/health", response_model=WireEnvelope, dependencies=[Depends(require_api_key)])
    async def health_check():
        """Health check endpoint."""
        return WireEnvelope.wrap(MessageKind.STATS_RESPONSE, {"status": "healthy", "service": service})

    @app.get("/metrics")
    async def metrics():
        """Prometheus metrics endpoint."""
        return Response(content=get_metrics(), media_type=get_metrics_content_type())

    return app


def create_db_app(
    config: Optional[RunConfig] = None,
    db: Optional[ProgramDatabase] = None,
) -> FastAPI:
    """
    Program database service. Without `db` the run's database is opened,
    from the newest snapshot in AHD_DATABASE_URL when there is one, and
    a snapshot is saved there on shutdown.
    """
    config = config or load_run_config()
    if not logging.getLogger("ahd").handlers:
        configure_logging(service="ahd-db", run_id=config.run_id)
    url = os.getenv("AHD_DATABASE_URL")
    run_id = config.run_id or "default"
    db = db or prepare_database(config, snapshot_url=url, run_id=run_id)

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        yield
        if url:
            save_snapshot(url, run_id, app.state.database)

    app = _base_app("AHD Program Database", "ahd-db", lifespan)
    app.state.database = db
    app.state.config = config
    app.include_router(
        database.router, prefix="/v1", tags=["Database"], dependencies=[Depends(require_api_key)]
    )
    logger.info(
        "Database service ready",
        extra={"extra_data": {"islands": config.n_islands, "protocol_hash": config.protocol_hash()}},
    )
    return app


def create_evaluator_app(
    config: Optional[RunConfig] = None,
    db_client: Optional[DbClient] = None,
) -> FastAPI:
    """Evaluator service registering its scores with the database at config.db_url."""
    config = config or load_run_config()
    if not logging.getLogger("ahd").handlers:
        configure_logging(service="ahd-evaluator", run_id=config.run_id)
    client = db_client or DbClient(config.db_url, api_key=os.getenv("AHD_API_KEY"))

    @asynccontextmanager
    async def lifespan(app: FastAPI) -> AsyncIterator[None]:
        yield
        if db_client is None:
            await client.close()

    app = _base_app("AHD Evaluator", "ahd-evaluator", lifespan)
    app.state.evaluator = Evaluator(config.eval_protocol(), client)
    app.state.config = config
    app.include_router(
        evaluator.router, prefix="/v1", tags=["Evaluator"], dependencies=[Depends(require_api_key)]
    )
    return app
