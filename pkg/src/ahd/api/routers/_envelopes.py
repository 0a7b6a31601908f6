"""Envelope helpers shared by the routers."""

from typing import TypeVar

from fastapi import HTTPException
from pydantic import BaseModel, ValidationError

from ahd.services.models import MessageKind, WireEnvelope

P = TypeVar("P", bound=BaseModel)


def unwrap(envelope: WireEnvelope, kind: MessageKind, schema: type[P]) -> P:
    """Payload of an envelope of the expected kind, or HTTP 400."""
    if envelope.kind is not kind:
        raise HTTPException(
            status_code=400,
            detail=f"Expected a {kind.value} envelope, got {envelope.kind.value}",
        )
    try:
        return schema.model_validate(envelope.payload)
    except ValidationError as e:
        raise HTTPException(status_code=400, detail=f"Malformed {kind.value} payload: {e}") from e
