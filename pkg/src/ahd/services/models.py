"""
Service Models

Wire envelope, payload schemas and mutator configuration shared by the
database service, evaluators and samplers.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

PROTOCOL_VERSION = "1"

DEFAULT_PROMPT_TEMPLATE = Path(__file__).resolve().parent.parent / "data" / "prompts" / "cnu_mutation.txt"


class MessageKind(str, Enum):
    SAMPLE_REQUEST = "sample_request"
    SAMPLE_RESPONSE = "sample_response"
    CANDIDATE_SUBMISSION = "candidate_submission"
    SCORE_REPORT = "score_report"
    RESET_COMMAND = "reset_command"
    STATS_RESPONSE = "stats_response"


class WireEnvelope(BaseModel):
    """Every request body and response of the services."""

    model_config = ConfigDict(extra="forbid")

    protocol_version: Literal["1"] = PROTOCOL_VERSION
    kind: MessageKind
    payload: dict[str, Any] = Field(default_factory=dict)
    idempotency_key: Optional[str] = None

    @classmethod
    def wrap(
        cls,
        kind: MessageKind,
        payload: BaseModel | dict[str, Any],
        idempotency_key: Optional[str] = None,
    ) -> "WireEnvelope":
        body = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
        return cls(kind=kind, payload=body, idempotency_key=idempotency_key)


# ----- Payloads -----


class SamplePayload(BaseModel):
    island: int = Field(ge=0)
    count: int = Field(default=4, ge=1)
    seed: int = 0


class CandidatePayload(BaseModel):
    """A mutator output on its way to an evaluator."""

    source: str
    island: int = Field(ge=0)
    candidate_id: Optional[str] = None
    parent_hashes: list[str] = Field(default_factory=list)
    generation: int = Field(default=0, ge=0)


class RegisterPayload(CandidatePayload):
    """A scored candidate on its way to the database."""

    record: dict[str, Any]
    protocol_hash: str = ""


class SkipPayload(BaseModel):
    candidate_id: str
    reason: str = ""


class ResetPayload(BaseModel):
    fraction: Optional[float] = Field(default=None, ge=0.0, le=1.0)


# ----- Mutator -----


class MutatorMode(str, Enum):
    LLM = "llm"
    MOCK = "mock"


class MutatorConfig(BaseModel):
    """How samplers turn sampled programs into new candidates."""

    mode: MutatorMode = MutatorMode.MOCK
    endpoint: Optional[str] = None
    model: str = "gpt-4o-mini"
    prompt_template: Path = DEFAULT_PROMPT_TEMPLATE
    examples_per_prompt: int = Field(default=4, ge=1)
    request_timeout: float = Field(default=60.0, gt=0)
    temperature: float = Field(default=1.0, ge=0)

    @field_validator("endpoint")
    @classmethod
    def _strip_endpoint(cls, value: Optional[str]) -> Optional[str]:
        return value.rstrip("/") if value else value

    @model_validator(mode="after")
    def _llm_needs_endpoint(self) -> "MutatorConfig":
        if self.mode is MutatorMode.LLM and not self.endpoint:
            raise ValueError("mutator mode 'llm' requires an endpoint")
        return self
