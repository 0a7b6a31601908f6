"""
Database Router

Program database endpoints used by samplers and evaluators.
"""

from typing import Optional

from fastapi import APIRouter, Depends, HTTPException, Query

from ahd.api.deps import get_database
from ahd.api.metrics import CANDIDATES, ISLAND_BEST_SCORE, RESETS
from ahd.evolution import (
    EmptyIsland,
    Outcome,
    ProgramDatabase,
    ProtocolMismatch,
    ResetInProgress,
    ResetPolicy,
    UnknownIsland,
    stored_to_dict,
)
from ahd.kernelscript import KernelProgram, KernelSyntaxError, ValidationError, parse
from ahd.scoring import ScoreRecord
from ahd.services.models import (
    MessageKind,
    RegisterPayload,
    ResetPayload,
    SamplePayload,
    SkipPayload,
    WireEnvelope,
)

from ._envelopes import unwrap

router = APIRouter()


def _http_error(e: Exception) -> HTTPException:
    if isinstance(e, UnknownIsland):
        return HTTPException(status_code=404, detail=str(e))
    if isinstance(e, (ProtocolMismatch, EmptyIsland)):
        return HTTPException(status_code=409, detail=str(e))
    if isinstance(e, ResetInProgress):
        return HTTPException(status_code=503, detail=str(e))
    return HTTPException(status_code=400, detail=str(e))


def _sample(db: ProgramDatabase, request: SamplePayload) -> WireEnvelope:
    try:
        programs = db.sample(request.island, request.count, request.seed)
    except (UnknownIsland, EmptyIsland) as e:
        raise _http_error(e) from e
    return WireEnvelope.wrap(
        MessageKind.SAMPLE_RESPONSE,
        {"island": request.island, "programs": [stored_to_dict(p) for p in programs]},
    )


def _update_gauges(db: ProgramDatabase) -> None:
    for island in db.islands:
        if island.clusters:
            ISLAND_BEST_SCORE.labels(island=str(island.id)).set(island.best_score)


# ----- Endpoints -----


@router.get("/sample", response_model=WireEnvelope)
def sample_programs(
    island: int = Query(..., ge=0),
    count: int = Query(4, ge=1, le=64),
    seed: int = Query(0),
    db: ProgramDatabase = Depends(get_database),
):
    """Sample programs from an island, ascending by score."""
    return _sample(db, SamplePayload(island=island, count=count, seed=seed))


@router.post("/sample", response_model=WireEnvelope)
def sample_programs_envelope(envelope: WireEnvelope, db: ProgramDatabase = Depends(get_database)):
    """Sample via a sample_request envelope."""
    return _sample(db, unwrap(envelope, MessageKind.SAMPLE_REQUEST, SamplePayload))


@router.post("/register", response_model=WireEnvelope)
def register_candidate(envelope: WireEnvelope, db: ProgramDatabase = Depends(get_database)):
    """Store a scored candidate; idempotent per candidate id or content hash."""
    payload = unwrap(envelope, MessageKind.SCORE_REPORT, RegisterPayload)
    try:
        record = ScoreRecord.from_dict(payload.record)
    except (KeyError, TypeError, ValueError) as e:
        raise HTTPException(status_code=400, detail=f"Malformed score record: {e}") from e

    program: KernelProgram | str
    if record.catastrophic:
        program = payload.source
    else:
        try:
            program = parse(payload.source).with_lineage(
                tuple(payload.parent_hashes), payload.generation
            )
        except (KernelSyntaxError, ValidationError) as e:
            raise HTTPException(status_code=400, detail=f"Unparseable program: {e}") from e

    candidate_id = payload.candidate_id or envelope.idempotency_key
    try:
        result = db.register(payload.island, program, record, candidate_id)
    except (UnknownIsland, ProtocolMismatch, ResetInProgress) as e:
        raise _http_error(e) from e

    if result.outcome is not Outcome.REPLAYED:
        CANDIDATES.labels(outcome=result.outcome.value).inc()
    if result.reset is not None:
        RESETS.inc()
    _update_gauges(db)
    return WireEnvelope.wrap(MessageKind.SCORE_REPORT, result.to_dict(), idempotency_key=candidate_id)


@router.post("/skip", response_model=WireEnvelope)
def skip_candidate(envelope: WireEnvelope, db: ProgramDatabase = Depends(get_database)):
    """Record a round whose mutator call failed."""
    payload = unwrap(envelope, MessageKind.SCORE_REPORT, SkipPayload)
    index: Optional[int] = db.skip(payload.candidate_id, payload.reason)
    if index is not None:
        CANDIDATES.labels(outcome=Outcome.SKIPPED.value).inc()
    return WireEnvelope.wrap(
        MessageKind.SCORE_REPORT,
        {"outcome": Outcome.SKIPPED.value, "candidate_index": index, "recorded": index is not None},
        idempotency_key=payload.candidate_id,
    )


@router.post("/reset", response_model=WireEnvelope)
def reset_islands(envelope: WireEnvelope, db: ProgramDatabase = Depends(get_database)):
    """Run a genetic reset now."""
    payload = unwrap(envelope, MessageKind.RESET_COMMAND, ResetPayload)
    policy = db.config.reset
    if payload.fraction is not None:
        policy = ResetPolicy(every=policy.every, fraction=payload.fraction)
    try:
        report = db.genetic_reset(policy)
    except ResetInProgress as e:
        raise _http_error(e) from e
    RESETS.inc()
    _update_gauges(db)
    return WireEnvelope.wrap(MessageKind.RESET_COMMAND, report.to_dict())


@router.get("/stats", response_model=WireEnvelope)
def database_stats(db: ProgramDatabase = Depends(get_database)):
    """Per-island and global counters."""
    return WireEnvelope.wrap(MessageKind.STATS_RESPONSE, db.stats())
