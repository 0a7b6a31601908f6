"""
Orchestrator

Starts an evolution run. Local mode runs the database, one evaluator and
the samplers in this process, talking through the same HTTP contracts
over in-memory ASGI transports. Distributed mode runs sampler workers
against database and evaluator services started elsewhere.
"""

from __future__ import annotations

import asyncio
import logging
import os
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional, Union

import httpx

from ahd.evolution import ProgramDatabase, ProtocolMismatch, open_database
from ahd.scoring import score_candidate

from .client import DbClient, EvaluatorClient
from .sampler import Sampler, SamplerSettings, sampler_loop

if TYPE_CHECKING:
    from ahd.config import RunConfig

logger = logging.getLogger(__name__)


def load_snapshot(url: str, run_id: str, protocol_hash: str = "") -> Optional[dict[str, Any]]:
    """Newest snapshot state of a run from the snapshot store at `url`."""
    from ahd.db import SnapshotRepository, init_db, make_engine, make_session_factory, session_scope

    engine = make_engine(url)
    try:
        init_db(engine)
        with session_scope(make_session_factory(engine)) as session:
            return SnapshotRepository(session).latest_state(run_id, protocol_hash)
    finally:
        engine.dispose()


def save_snapshot(url: str, run_id: str, db: ProgramDatabase) -> None:
    from ahd.db import SnapshotRepository, init_db, make_engine, make_session_factory, session_scope

    engine = make_engine(url)
    try:
        init_db(engine)
        with session_scope(make_session_factory(engine)) as session:
            SnapshotRepository(session).save(run_id, db)
    finally:
        engine.dispose()
    logger.info(
        "Snapshot saved",
        extra={"extra_data": {"run_id": run_id, "generated": db.generated, "events": db.event_count}},
    )


def prepare_database(
    config: RunConfig,
    event_log: Optional[Union[str, Path]] = None,
    *,
    snapshot_url: Optional[str] = None,
    run_id: Optional[str] = None,
) -> ProgramDatabase:
    """
    Open the run's database; seed it when it is new.

    With a snapshot store the newest snapshot of `run_id` is loaded and
    only the events logged after it are replayed. The seed program is
    scored under the run's protocol; a catastrophic seed fails the run
    before any worker starts.
    """
    event_log = event_log or config.event_log
    db_config = config.database_config()
    snapshot = None
    if snapshot_url:
        snapshot = load_snapshot(snapshot_url, run_id or config.run_id or "default", db_config.protocol_hash)
    db = open_database(db_config, event_log, snapshot)
    if db.global_best is None:
        program = config.seed_kernel.program()
        record = score_candidate(program, config.eval_protocol())
        db.seed(program, record)
        logger.info(
            "Database seeded",
            extra={"extra_data": {
                "kernel": config.seed_kernel.kernel,
                "score": record.score,
                "islands": config.n_islands,
            }},
        )
    return db


async def run_local(
    config: RunConfig,
    *,
    event_log: Optional[Union[str, Path]] = None,
    budget: Optional[int] = None,
    database: Optional[ProgramDatabase] = None,
) -> ProgramDatabase:
    """Run until the database has seen `budget` candidates; returns the database."""
    from ahd.api.app import create_db_app, create_evaluator_app

    db = database or prepare_database(config, event_log)
    budget = budget or config.budget
    db_client = DbClient("http://ahd-db", transport=httpx.ASGITransport(app=create_db_app(config, db)))
    evaluator_app = create_evaluator_app(config, db_client=db_client)
    evaluator = EvaluatorClient("http://ahd-evaluator", transport=httpx.ASGITransport(app=evaluator_app))

    try:
        samplers = [
            Sampler(
                config.mutator,
                SamplerSettings(config.n_islands, config.seed, i, config.n_samplers),
                db_client,
                [evaluator],
            )
            for i in range(config.n_samplers)
        ]
        # a single sampler resumes exactly where an interrupted run stopped
        start = db.generated if config.n_samplers == 1 else 0
        await asyncio.gather(*(sampler_loop(s, start=start, budget=budget) for s in samplers))
    finally:
        await evaluator.close()
        await db_client.close()

    logger.info("Local run finished", extra={"extra_data": db.stats()})
    return db


async def run_distributed(config: RunConfig, *, budget: Optional[int] = None) -> dict[str, Any]:
    """Run sampler workers against the configured services; returns final stats."""
    api_key = os.getenv("AHD_API_KEY")
    budget = budget or config.budget
    db_client = DbClient(config.db_url, api_key=api_key)
    evaluators = [EvaluatorClient(url, api_key=api_key) for url in config.evaluator_urls]
    llm = httpx.AsyncClient(timeout=config.mutator.request_timeout)

    try:
        stats = await db_client.stats()
        if stats.get("protocol_hash") and stats["protocol_hash"] != config.protocol_hash():
            raise ProtocolMismatch("Database service runs a different evaluation protocol")
        samplers = [
            Sampler(
                config.mutator,
                SamplerSettings(config.n_islands, config.seed, i, config.n_samplers),
                db_client,
                evaluators,
                llm_client=llm,
            )
            for i in range(config.n_samplers)
        ]
        await asyncio.gather(*(sampler_loop(s, budget=budget) for s in samplers))
        return await db_client.stats()
    finally:
        await llm.aclose()
        for client in evaluators:
            await client.close()
        await db_client.close()
