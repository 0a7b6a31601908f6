"""
Services

Wire protocol, service clients, mutators, the evaluator and sampler
workers, and the run orchestrator.
"""

from .client import DbClient, EvaluatorClient, RetryPolicy, ServiceClient
from .errors import EnvelopeError, LlmBadResponse, LlmTimeout, ServiceError, ServiceUnavailable
from .evaluator import Evaluator
from .models import (
    PROTOCOL_VERSION,
    CandidatePayload,
    MessageKind,
    MutatorConfig,
    MutatorMode,
    RegisterPayload,
    ResetPayload,
    SamplePayload,
    SkipPayload,
    WireEnvelope,
)
from .mutator import llm_mutate, mock_mutate
from .orchestrator import load_snapshot, prepare_database, run_distributed, run_local, save_snapshot
from .prompts import load_template, render_prompt
from .sampler import Sampler, SamplerSettings, round_seeds, sampler_loop

__all__ = [
    "DbClient",
    "EvaluatorClient",
    "RetryPolicy",
    "ServiceClient",
    "EnvelopeError",
    "LlmBadResponse",
    "LlmTimeout",
    "ServiceError",
    "ServiceUnavailable",
    "Evaluator",
    "PROTOCOL_VERSION",
    "CandidatePayload",
    "MessageKind",
    "MutatorConfig",
    "MutatorMode",
    "RegisterPayload",
    "ResetPayload",
    "SamplePayload",
    "SkipPayload",
    "WireEnvelope",
    "llm_mutate",
    "mock_mutate",
    "load_snapshot",
    "prepare_database",
    "run_distributed",
    "run_local",
    "save_snapshot",
    "load_template",
    "render_prompt",
    "Sampler",
    "SamplerSettings",
    "round_seeds",
    "sampler_loop",
]
