"""
Run Configuration

JSON run config validated by pydantic. Environment (a local .env is
honoured) supplies defaults the file leaves open:

    AHD_RUN_CONFIG     path of the run config (services started by uvicorn)
    AHD_SEED           global seed
    AHD_LLM_ENDPOINT   chat-completions URL for mutator mode "llm"
    AHD_API_KEY        shared key of the database/evaluator services
"""

import json
import os
from pathlib import Path
from typing import Any, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ahd.errors import ConfigError
from ahd.evolution import DatabaseConfig, ResetPolicy
from ahd.kernels import KernelParams, kernel_names
from ahd.kernelscript import EvalBudget, KernelProgram, seed_program
from ahd.phy import Context
from ahd.scoring import DEFAULT_CONTEXT, EvalProtocol, protocol_hash
from ahd.services.models import MutatorConfig


class ContextSettings(BaseModel):
    n_prb: int = Field(ge=1)
    mcs_index: int = Field(ge=0)
    snr_db: float

    def to_context(self) -> Context:
        return Context(self.n_prb, self.mcs_index, self.snr_db)


class ProtocolSettings(BaseModel):
    """Fields of the fixed evaluation protocol."""

    model_config = ConfigDict(extra="forbid")

    contexts: list[ContextSettings] = Field(
        default_factory=lambda: [ContextSettings(**DEFAULT_CONTEXT.to_dict())]
    )
    n_tbs: int = Field(default=30, ge=1)
    tb_batch_seed: int = 0
    max_iters: int = Field(default=50, ge=1)
    clip: float = Field(default=16.0, gt=0)
    lift_size: int = 16
    max_scalar_ops: int = Field(default=10_000_000, gt=0)
    wall_clock_ms: int = Field(default=5000, gt=0)

    def to_protocol(self) -> EvalProtocol:
        return EvalProtocol(
            contexts=tuple(c.to_context() for c in self.contexts),
            n_tbs=self.n_tbs,
            tb_batch_seed=self.tb_batch_seed,
            max_iters=self.max_iters,
            clip=self.clip,
            lift_size=self.lift_size,
            budget=EvalBudget(self.max_scalar_ops, self.wall_clock_ms),
        )


class SeedKernelSettings(BaseModel):
    """Native kernel whose KernelScript form seeds every island."""

    kernel: str = "offset-min-sum"
    beta: float = 0.5

    def program(self) -> KernelProgram:
        return seed_program(self.kernel, KernelParams(beta=self.beta))


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    run_id: Optional[str] = None
    seed: int = 0
    budget: int = Field(default=500, ge=1)

    n_islands: int = Field(default=4, ge=1)
    temperature_init: float = Field(default=1.0, gt=0)
    temperature_period: int = Field(default=1000, ge=1)
    length_scale: float = Field(default=200.0, gt=0)
    reset_every: int = Field(default=5000, ge=0)
    reset_fraction: float = Field(default=0.5, ge=0.0, le=1.0)

    protocol: ProtocolSettings = Field(default_factory=ProtocolSettings)
    mutator: MutatorConfig = Field(default_factory=MutatorConfig)
    seed_kernel: SeedKernelSettings = Field(default_factory=SeedKernelSettings)

    db_url: str = "http://127.0.0.1:8100"
    evaluator_urls: list[str] = Field(default_factory=lambda: ["http://127.0.0.1:8200"])
    n_samplers: int = Field(default=1, ge=1)
    event_log: Optional[Path] = None

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.seed_kernel.kernel not in kernel_names():
            raise ValueError(f"Unknown seed kernel {self.seed_kernel.kernel!r}")
        if not self.evaluator_urls:
            raise ValueError("At least one evaluator URL is required")
        # EvalProtocol and the MCS table perform the remaining checks
        self.protocol.to_protocol()
        return self

    def eval_protocol(self) -> EvalProtocol:
        return self.protocol.to_protocol()

    def protocol_hash(self) -> str:
        return protocol_hash(self.eval_protocol())

    def database_config(self) -> DatabaseConfig:
        return DatabaseConfig(
            n_islands=self.n_islands,
            temperature_init=self.temperature_init,
            temperature_period=self.temperature_period,
            length_scale=self.length_scale,
            reset=ResetPolicy(every=self.reset_every, fraction=self.reset_fraction),
            protocol_hash=self.protocol_hash(),
            seed=self.seed,
        )

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def _apply_env(data: dict[str, Any]) -> dict[str, Any]:
    if "seed" not in data and os.getenv("AHD_SEED"):
        data["seed"] = int(os.environ["AHD_SEED"])
    endpoint = os.getenv("AHD_LLM_ENDPOINT")
    if endpoint:
        mutator = dict(data.get("mutator") or {})
        mutator.setdefault("endpoint", endpoint)
        data["mutator"] = mutator
    return data


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """
    Load and validate a run config.

    Without a path AHD_RUN_CONFIG is used; without either the defaults
    apply. Any problem raises ConfigError before a worker starts.
    """
    load_dotenv()
    path = path or os.getenv("AHD_RUN_CONFIG")
    data: dict[str, Any] = {}
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"Cannot read run config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Run config {path} is not valid JSON: {e.msg} (line {e.lineno})") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Run config {path} must hold a JSON object")

    data = _apply_env(data)
    data.update(overrides or {})
    try:
        return RunConfig.model_validate(data)
    except (ValidationError, ValueError) as e:
        raise ConfigError(f"Invalid run config: {e}") from e
