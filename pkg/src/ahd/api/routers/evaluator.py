"""
Evaluator Router

Candidate submissions from samplers.
"""

from fastapi import APIRouter, Depends, HTTPException

from ahd.api.deps import get_evaluator
from ahd.services.errors import EnvelopeError, ServiceError, ServiceUnavailable
from ahd.services.evaluator import Evaluator
from ahd.services.models import CandidatePayload, MessageKind, WireEnvelope

from ._envelopes import unwrap

router = APIRouter()


@router.post("/evaluate", response_model=WireEnvelope)
async def evaluate_candidate(envelope: WireEnvelope, evaluator: Evaluator = Depends(get_evaluator)):
    """Score a candidate and register it with the database."""
    candidate = unwrap(envelope, MessageKind.CANDIDATE_SUBMISSION, CandidatePayload)
    if candidate.candidate_id is None:
        candidate = candidate.model_copy(update={"candidate_id": envelope.idempotency_key})
    try:
        report = await evaluator.evaluate(candidate)
    except ServiceError as e:
        # pass the database's verdict through (404 island, 409 protocol)
        raise HTTPException(status_code=e.status_code, detail=e.detail) from e
    except (ServiceUnavailable, EnvelopeError) as e:
        raise HTTPException(status_code=502, detail=str(e)) from e
    return WireEnvelope.wrap(
        MessageKind.SCORE_REPORT, report, idempotency_key=candidate.candidate_id
    )
