"""
Evolution Models

Islands hold clusters of programs keyed by their (rounded) score.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

from ahd.kernelscript import KernelProgram
from ahd.scoring import ScoreRecord

SCORE_DECIMALS = 6


def cluster_key(score: float) -> float:
    """Scores are clustered by exact equality after rounding."""
    return round(score, SCORE_DECIMALS)


class EventType(str, Enum):
    SEED = "seed"
    REGISTER = "register"
    SKIP = "skip"
    RESET = "reset"


class Outcome(str, Enum):
    ACCEPTED = "accepted"
    CATASTROPHIC = "catastrophic"
    DUPLICATE = "duplicate"
    REPLAYED = "replayed"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class StoredProgram:
    """A program with the score it obtained under the run's protocol."""
    program: KernelProgram
    record: ScoreRecord

    @property
    def score(self) -> float:
        return self.record.score

    @property
    def content_hash(self) -> str:
        return self.program.content_hash


@dataclass
class Cluster:
    """Programs sharing one score."""
    score: float
    programs: list[StoredProgram] = field(default_factory=list)

    def hashes(self) -> set[str]:
        return {p.content_hash for p in self.programs}

    def best(self) -> StoredProgram:
        """Shortest source, then smallest hash."""
        return min(self.programs, key=lambda p: (p.program.length, p.content_hash))


@dataclass
class Island:
    """One semi-isolated population."""
    id: int
    clusters: dict[float, Cluster] = field(default_factory=dict)
    program_count: int = 0
    created_at: float = 0.0
    version: int = 0

    @property
    def best_score(self) -> float:
        return max(self.clusters) if self.clusters else -math.inf

    @property
    def cluster_count(self) -> int:
        return len(self.clusters)

    def contains(self, content_hash: str) -> bool:
        return any(content_hash in c.hashes() for c in self.clusters.values())

    def add(self, stored: StoredProgram) -> None:
        key = cluster_key(stored.score)
        cluster = self.clusters.setdefault(key, Cluster(score=key))
        cluster.programs.append(stored)
        self.program_count += 1

    def clear(self) -> None:
        self.clusters.clear()
        self.program_count = 0
        self.version += 1

    def best_program(self) -> Optional[StoredProgram]:
        if not self.clusters:
            return None
        return self.clusters[self.best_score].best()

    def programs(self) -> list[StoredProgram]:
        return [p for c in self.clusters.values() for p in c.programs]


@dataclass(frozen=True)
class RegisterResult:
    accepted: bool
    outcome: Outcome
    island_id: int
    candidate_index: Optional[int]
    content_hash: str
    score: float
    reset: Optional["ResetReport"] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "accepted": self.accepted,
            "outcome": self.outcome.value,
            "island_id": self.island_id,
            "candidate_index": self.candidate_index,
            "content_hash": self.content_hash,
            "score": self.score,
            "reset": self.reset.to_dict() if self.reset else None,
        }


@dataclass(frozen=True)
class ResetEntry:
    reset_island: int
    donor_island: int
    seed_hash: str


@dataclass(frozen=True)
class ResetReport:
    entries: tuple[ResetEntry, ...]
    reset_index: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "reset_index": self.reset_index,
            "entries": [
                {"reset_island": e.reset_island, "donor_island": e.donor_island, "seed_hash": e.seed_hash}
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class ResetPolicy:
    """Genetic reset cadence and strength."""
    every: int = 5000                # accepted registrations between automatic resets; 0 disables
    fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.every < 0:
            raise ValueError("Reset cadence must be >= 0")
        if not 0 <= self.fraction <= 1:
            raise ValueError("Reset fraction must lie in [0, 1]")


@dataclass(frozen=True)
class DatabaseConfig:
    """Island database knobs."""
    n_islands: int = 4
    temperature_init: float = 1.0
    temperature_period: int = 1000
    length_scale: float = 200.0
    reset: ResetPolicy = field(default_factory=ResetPolicy)
    protocol_hash: str = ""
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_islands < 1:
            raise ValueError("Need at least one island")
        if self.temperature_init <= 0 or self.temperature_period < 1 or self.length_scale <= 0:
            raise ValueError("Sampling parameters must be positive")


@dataclass(frozen=True)
class TraceRow:
    """One generated candidate in registration order."""
    candidate_index: int
    island_id: Optional[int]
    outcome: Outcome
    score: Optional[float]
    best_so_far: Optional[float]
