"""
Scoring Models

score = -(1e9 * catastrophic + 1e7 * undecoded + 1e6 * mean_ber + total_iterations)

Higher is better. With at most 99 TBs per protocol every catastrophic
record scores below every non-catastrophic one, and one more undecoded TB
always outweighs any BER and iteration difference.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Optional

from ahd.decoder import DEFAULT_LLR_CLIP, DEFAULT_MAX_ITERS
from ahd.kernelscript import EvalBudget
from ahd.phy import Context

CATASTROPHIC_WEIGHT = 1e9
UNDECODED_WEIGHT = 1e7
BER_WEIGHT = 1e6
ITERATION_WEIGHT = 1.0

MAX_PROTOCOL_TBS = 99

# BPSK rate 1/2 on 2 PRBs near the edge of the decodable region of the desk code
DEFAULT_CONTEXT = Context(n_prb=2, mcs_index=1, snr_db=1.0)


def compute_score(catastrophic: int, undecoded: int, mean_ber: float, total_iterations: int) -> float:
    return -(
        CATASTROPHIC_WEIGHT * catastrophic
        + UNDECODED_WEIGHT * undecoded
        + BER_WEIGHT * mean_ber
        + ITERATION_WEIGHT * total_iterations
    )


@dataclass(frozen=True)
class ScoreRecord:
    """Outcome of evaluating one candidate under a protocol."""
    score: float
    catastrophic: int
    undecoded: int
    mean_ber: float
    total_iterations: int
    context_ids: tuple[str, ...]
    tb_batch_seed: int
    protocol_hash: str = ""
    fault: Optional[str] = None

    @classmethod
    def build(
        cls,
        *,
        undecoded: int,
        mean_ber: float,
        total_iterations: int,
        context_ids: tuple[str, ...],
        tb_batch_seed: int,
        protocol_hash: str = "",
    ) -> "ScoreRecord":
        return cls(
            score=compute_score(0, undecoded, mean_ber, total_iterations),
            catastrophic=0,
            undecoded=undecoded,
            mean_ber=mean_ber,
            total_iterations=total_iterations,
            context_ids=context_ids,
            tb_batch_seed=tb_batch_seed,
            protocol_hash=protocol_hash,
        )

    @classmethod
    def catastrophe(
        cls,
        fault: str,
        *,
        context_ids: tuple[str, ...] = (),
        tb_batch_seed: int = 0,
        protocol_hash: str = "",
    ) -> "ScoreRecord":
        return cls(
            score=compute_score(1, 0, 0.0, 0),
            catastrophic=1,
            undecoded=0,
            mean_ber=0.0,
            total_iterations=0,
            context_ids=context_ids,
            tb_batch_seed=tb_batch_seed,
            protocol_hash=protocol_hash,
            fault=fault,
        )

    @property
    def penalty_breakdown(self) -> dict[str, Any]:
        return {
            "catastrophic": self.catastrophic,
            "undecoded": self.undecoded,
            "mean_ber": self.mean_ber,
            "total_iterations": self.total_iterations,
        }

    def recomputed_score(self) -> float:
        return compute_score(self.catastrophic, self.undecoded, self.mean_ber, self.total_iterations)

    def to_dict(self) -> dict[str, Any]:
        return {
            "score": self.score,
            "penalty_breakdown": self.penalty_breakdown,
            "context_ids": list(self.context_ids),
            "tb_batch_seed": self.tb_batch_seed,
            "protocol_hash": self.protocol_hash,
            "fault": self.fault,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScoreRecord":
        breakdown = data["penalty_breakdown"]
        return cls(
            score=float(data["score"]),
            catastrophic=int(breakdown["catastrophic"]),
            undecoded=int(breakdown["undecoded"]),
            mean_ber=float(breakdown["mean_ber"]),
            total_iterations=int(breakdown["total_iterations"]),
            context_ids=tuple(data.get("context_ids", ())),
            tb_batch_seed=int(data.get("tb_batch_seed", 0)),
            protocol_hash=data.get("protocol_hash", ""),
            fault=data.get("fault"),
        )


@dataclass(frozen=True)
class EvalProtocol:
    """The fixed evaluation every candidate goes through."""
    contexts: tuple[Context, ...] = (DEFAULT_CONTEXT,)
    n_tbs: int = 30
    tb_batch_seed: int = 0
    max_iters: int = DEFAULT_MAX_ITERS
    clip: float = DEFAULT_LLR_CLIP
    lift_size: int = 16
    budget: EvalBudget = field(default_factory=EvalBudget)

    def __post_init__(self) -> None:
        if not self.contexts:
            raise ValueError("Protocol needs at least one context")
        if self.n_tbs < 1:
            raise ValueError(f"n_tbs must be >= 1, got {self.n_tbs}")
        if self.n_tbs * len(self.contexts) > MAX_PROTOCOL_TBS:
            raise ValueError(f"A protocol may evaluate at most {MAX_PROTOCOL_TBS} TBs")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.clip > 0:
            raise ValueError(f"clip must be positive, got {self.clip}")

    @property
    def context_ids(self) -> tuple[str, ...]:
        return tuple(c.context_id for c in self.contexts)

    def to_dict(self) -> dict[str, Any]:
        return {
            "contexts": [c.to_dict() for c in self.contexts],
            "n_tbs": self.n_tbs,
            "tb_batch_seed": self.tb_batch_seed,
            "max_iters": self.max_iters,
            "clip": self.clip,
            "lift_size": self.lift_size,
            "budget": {
                "max_scalar_ops": self.budget.max_scalar_ops,
                "wall_clock_ms": self.budget.wall_clock_ms,
            },
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvalProtocol":
        budget = data.get("budget") or {}
        return cls(
            contexts=tuple(Context.from_dict(c) for c in data.get("contexts", [DEFAULT_CONTEXT.to_dict()])),
            n_tbs=int(data.get("n_tbs", 30)),
            tb_batch_seed=int(data.get("tb_batch_seed", 0)),
            max_iters=int(data.get("max_iters", DEFAULT_MAX_ITERS)),
            clip=float(data.get("clip", DEFAULT_LLR_CLIP)),
            lift_size=int(data.get("lift_size", 16)),
            budget=EvalBudget(**budget),
        )


@dataclass(frozen=True)
class GridPoint:
    """Sweep result at one context."""
    context: Context
    n_tbs: int
    success_fraction: float
    mean_iterations: float
    mean_ber: float


@dataclass(frozen=True)
class ComparisonRow:
    """Trial statistics of one kernel at one context."""
    kernel: str
    context_id: str
    trials: int
    decoded_mean: float
    decoded_std: float
    ber_mean: float
    ber_std: float
    iterations_mean: float
    iterations_std: float
    catastrophic: bool = False
    fault: Optional[str] = None


@dataclass(frozen=True)
class GeneralizationRow:
    """A kernel against a reference kernel at one context."""
    context: Context
    success_fraction: float
    reference_success_fraction: float
    mean_iterations: float
    reference_mean_iterations: float
    holds: bool
