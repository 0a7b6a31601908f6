"""
Program Database

Island-model store of scored KernelScript programs. Writes (register,
skip, reset) are serialized behind one lock; every write is appended to
the event log so a crashed database can be rebuilt by replay.

Accounting over all generated candidates:

    accepted + catastrophic + skipped = generated
    skipped = duplicates + mutator failures
"""

import json
import logging
import math
import threading
import time
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from ahd.errors import AhdError
from ahd.kernelscript import KernelProgram, parse, source_hash
from ahd.scoring import ScoreRecord

from .errors import CorruptLog, EmptyIsland, ProtocolMismatch, ResetInProgress, UnknownIsland
from .events import EventLog, read_events
from .models import (
    DatabaseConfig,
    EventType,
    Island,
    Outcome,
    RegisterResult,
    ResetEntry,
    ResetPolicy,
    ResetReport,
    StoredProgram,
    TraceRow,
)

logger = logging.getLogger(__name__)

Seed = Union[int, Sequence[int], np.random.Generator]


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _softmax(logits: np.ndarray, temperature: float) -> np.ndarray:
    shifted = (logits - logits.max()) / temperature
    weights = np.exp(shifted)
    return weights / weights.sum()


class ProgramDatabase:
    """Islands, clusters, temperature sampling and genetic resets."""

    def __init__(
        self,
        config: Optional[DatabaseConfig] = None,
        *,
        event_log: Optional[EventLog] = None,
        clock: Callable[[], float] = time.time,
    ):
        self.config = config or DatabaseConfig()
        self.event_log = event_log
        self.clock = clock
        self.islands = [Island(id=i, created_at=clock()) for i in range(self.config.n_islands)]

        self.generated = 0
        self.accepted = 0
        self.catastrophic = 0
        self.duplicates = 0
        self.mutator_failures = 0
        self.resets = 0
        self.event_count = 0

        self.history: list[TraceRow] = []
        self.global_best: Optional[StoredProgram] = None
        self._seen: set[str] = set()
        self._candidates: dict[str, RegisterResult] = {}
        self._lock = threading.RLock()
        self._resetting = False
        self._replaying = False

    # -------------------------------------------------------------------------
    # Helpers
    # -------------------------------------------------------------------------

    @property
    def skipped(self) -> int:
        return self.duplicates + self.mutator_failures

    @property
    def resetting(self) -> bool:
        return self._resetting

    def island(self, island_id: int) -> Island:
        if not 0 <= island_id < len(self.islands):
            raise UnknownIsland(f"Unknown island {island_id}")
        return self.islands[island_id]

    def _check_protocol(self, record: ScoreRecord) -> None:
        expected = self.config.protocol_hash
        if expected and record.protocol_hash and record.protocol_hash != expected:
            raise ProtocolMismatch(
                f"Record protocol {record.protocol_hash[:12]} != database protocol {expected[:12]}"
            )

    def _log(self, event: dict[str, Any]) -> None:
        if self._replaying:
            return
        self.event_count += 1
        if self.event_log is not None:
            self.event_log.append(event)

    def _improve_best(self, stored: StoredProgram) -> None:
        if self.global_best is None or stored.score > self.global_best.score:
            self.global_best = stored

    def _best_so_far(self) -> Optional[float]:
        return self.global_best.score if self.global_best else None

    # -------------------------------------------------------------------------
    # Writes
    # -------------------------------------------------------------------------

    def seed(self, program: KernelProgram, record: ScoreRecord) -> None:
        """Place an initial program into every island."""
        if record.catastrophic:
            raise ValueError("Cannot seed the database with a catastrophic program")
        with self._lock:
            self._check_protocol(record)
            stored = StoredProgram(program, record)
            for island in self.islands:
                if not island.contains(program.content_hash):
                    island.add(stored)
            self._seen.add(program.content_hash)
            self._improve_best(stored)
            self._log({
                "type": EventType.SEED.value,
                "source": program.source,
                "parent_hashes": list(program.parent_hashes),
                "generation": program.generation,
                "record": record.to_dict(),
            })

    def register(
        self,
        island_id: int,
        program: Union[KernelProgram, str],
        record: ScoreRecord,
        candidate_id: Optional[str] = None,
    ) -> RegisterResult:
        """
        Store a scored candidate in its island.

        `program` may be raw text only for catastrophic records (candidates
        that never parsed). A repeated candidate_id (or content hash when no
        id is given) returns the first result with accepted=False and
        changes nothing.
        """
        if self._resetting and not self._replaying:
            raise ResetInProgress("Genetic reset in progress")

        if isinstance(program, str):
            if not record.catastrophic:
                raise ValueError("Unparsed candidates can only be registered as catastrophic")
            content_hash, source = source_hash(program), program
            parent_hashes: tuple[str, ...] = ()
            generation = 0
        else:
            content_hash, source = program.content_hash, program.source
            parent_hashes, generation = program.parent_hashes, program.generation

        with self._lock:
            island = self.island(island_id)
            self._check_protocol(record)

            key = candidate_id or content_hash
            previous = self._candidates.get(key)
            if previous is not None:
                return replace(previous, accepted=False, outcome=Outcome.REPLAYED, reset=None)

            index = self.generated
            self.generated += 1

            if record.catastrophic:
                outcome = Outcome.CATASTROPHIC
                self.catastrophic += 1
            elif content_hash in self._seen:
                outcome = Outcome.DUPLICATE
                self.duplicates += 1
            else:
                assert isinstance(program, KernelProgram)
                outcome = Outcome.ACCEPTED
                stored = StoredProgram(program, record)
                island.add(stored)
                self._seen.add(content_hash)
                self.accepted += 1
                self._improve_best(stored)

            result = RegisterResult(
                accepted=outcome is Outcome.ACCEPTED,
                outcome=outcome,
                island_id=island_id,
                candidate_index=index,
                content_hash=content_hash,
                score=record.score,
            )
            self._candidates[key] = result
            self.history.append(TraceRow(
                candidate_index=index,
                island_id=island_id,
                outcome=outcome,
                score=None if record.catastrophic else record.score,
                best_so_far=self._best_so_far(),
            ))
            self._log({
                "type": EventType.REGISTER.value,
                "island": island_id,
                "candidate_id": candidate_id,
                "source": source,
                "parent_hashes": list(parent_hashes),
                "generation": generation,
                "record": record.to_dict(),
                "outcome": outcome.value,
            })
            logger.info(
                "Candidate registered",
                extra={"extra_data": {
                    "candidate_index": index,
                    "island": island_id,
                    "outcome": outcome.value,
                    "score": record.score,
                }},
            )

            every = self.config.reset.every
            if outcome is Outcome.ACCEPTED and every and self.accepted % every == 0:
                result = replace(result, reset=self._genetic_reset(self.config.reset, auto=True))
            return result

    def skip(self, candidate_id: str, reason: str = "") -> Optional[int]:
        """Record a round whose mutator call failed; idempotent by candidate_id."""
        with self._lock:
            if candidate_id in self._candidates:
                return None
            index = self.generated
            self.generated += 1
            self.mutator_failures += 1
            self._candidates[candidate_id] = RegisterResult(
                accepted=False,
                outcome=Outcome.SKIPPED,
                island_id=-1,
                candidate_index=index,
                content_hash="",
                score=-math.inf,
            )
            self.history.append(TraceRow(
                candidate_index=index,
                island_id=None,
                outcome=Outcome.SKIPPED,
                score=None,
                best_so_far=self._best_so_far(),
            ))
            self._log({"type": EventType.SKIP.value, "candidate_id": candidate_id, "reason": reason})
            logger.info(
                "Candidate skipped",
                extra={"extra_data": {"candidate_index": index, "reason": reason}},
            )
            return index

    def genetic_reset(self, policy: Optional[ResetPolicy] = None) -> ResetReport:
        """Re-seed the weakest islands from the best programs of surviving ones."""
        if self._resetting and not self._replaying:
            raise ResetInProgress("Genetic reset in progress")
        with self._lock:
            return self._genetic_reset(policy or self.config.reset, auto=False)

    def _genetic_reset(self, policy: ResetPolicy, auto: bool) -> ResetReport:
        reset_index = self.resets
        self.resets += 1
        entries: list[ResetEntry] = []
        if len(self.islands) >= 2:
            self._resetting = True
            try:
                entries = self._reseed(policy, np.random.default_rng([self.config.seed, reset_index]))
            finally:
                self._resetting = False

        report = ResetReport(entries=tuple(entries), reset_index=reset_index)
        self._log({
            "type": EventType.RESET.value,
            "auto": auto,
            "fraction": policy.fraction,
            "report": report.to_dict(),
        })
        logger.info(
            "Genetic reset",
            extra={"extra_data": {"reset_index": reset_index, "islands_reset": len(entries)}},
        )
        return report

    def _reseed(self, policy: ResetPolicy, rng: np.random.Generator) -> list[ResetEntry]:
        # strongest first: higher best score, then lower island id
        ranked = sorted(self.islands, key=lambda i: (-i.best_score, i.id))
        n_reset = min(int(math.floor(policy.fraction * len(ranked))), len(ranked) - 1)
        if n_reset <= 0:
            return []
        survivors = [i for i in ranked[:-n_reset] if i.program_count]
        if not survivors:
            return []

        entries: list[ResetEntry] = []
        for island in sorted(ranked[-n_reset:], key=lambda i: i.id):
            donor = survivors[int(rng.integers(len(survivors)))]
            seed = donor.best_program()
            assert seed is not None
            island.clear()
            island.created_at = self.clock()
            island.add(seed)
            entries.append(ResetEntry(island.id, donor.id, seed.content_hash))
        return entries

    # -------------------------------------------------------------------------
    # Reads
    # -------------------------------------------------------------------------

    def temperature(self, island: Island) -> float:
        period = self.config.temperature_period
        return self.config.temperature_init * (1.0 - (island.program_count % period) / period)

    def sample(self, island_id: int, k: int, rng_seed: Seed) -> list[StoredProgram]:
        """
        Draw up to k programs, ascending by score so the best comes last.

        Clusters are chosen by a softmax over scores at the island's
        temperature and not revisited until every cluster was drawn; within
        a cluster shorter programs are preferred.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        with self._lock:
            island = self.island(island_id)
            if not island.program_count:
                raise EmptyIsland(f"Island {island_id} is empty")
            rng = _rng(rng_seed)
            temperature = self.temperature(island)
            keys = sorted(island.clusters)
            taken: set[str] = set()
            picked: list[StoredProgram] = []
            pool: list[float] = []

            while len(picked) < k:
                if not pool:
                    pool = [key for key in keys if island.clusters[key].hashes() - taken]
                    if not pool:
                        break
                probs = _softmax(np.array(pool, dtype=np.float64), temperature)
                key = pool.pop(int(rng.choice(len(pool), p=probs)))
                programs = [p for p in island.clusters[key].programs if p.content_hash not in taken]
                if not programs:
                    continue
                picked.append(self._pick_short(programs, rng))
                taken.add(picked[-1].content_hash)

        return sorted(picked, key=lambda p: (p.score, p.content_hash))

    def _pick_short(self, programs: list[StoredProgram], rng: np.random.Generator) -> StoredProgram:
        lengths = np.array([p.program.length for p in programs], dtype=np.float64)
        weights = np.exp(-(lengths - lengths.min()) / self.config.length_scale)
        return programs[int(rng.choice(len(programs), p=weights / weights.sum()))]

    def stats(self) -> dict[str, Any]:
        with self._lock:
            best = self.global_best
            return {
                "islands": [
                    {
                        "id": i.id,
                        "program_count": i.program_count,
                        "best_score": None if not i.clusters else i.best_score,
                        "cluster_count": i.cluster_count,
                    }
                    for i in self.islands
                ],
                "global_best": None if best is None else {
                    "content_hash": best.content_hash,
                    "source": best.program.source,
                    "score": best.score,
                },
                "total_candidates": self.generated,
                "accepted": self.accepted,
                "catastrophic": self.catastrophic,
                "skipped": self.skipped,
                "duplicates": self.duplicates,
                "mutator_failures": self.mutator_failures,
                "resets": self.resets,
                "protocol_hash": self.config.protocol_hash,
            }

    # -------------------------------------------------------------------------
    # Persistence
    # -------------------------------------------------------------------------

    def to_state(self, include_times: bool = False) -> dict[str, Any]:
        """Snapshot of the full database state."""
        with self._lock:
            islands = []
            for island in self.islands:
                entry: dict[str, Any] = {
                    "id": island.id,
                    "version": island.version,
                    "programs": [stored_to_dict(p) for p in island.programs()],
                }
                if include_times:
                    entry["created_at"] = island.created_at
                islands.append(entry)
            return {
                "islands": islands,
                "counters": {
                    "generated": self.generated,
                    "accepted": self.accepted,
                    "catastrophic": self.catastrophic,
                    "duplicates": self.duplicates,
                    "mutator_failures": self.mutator_failures,
                    "resets": self.resets,
                    "events": self.event_count,
                },
                "global_best": None if self.global_best is None else stored_to_dict(self.global_best),
                "seen": sorted(self._seen),
                "candidates": {k: r.to_dict() for k, r in sorted(self._candidates.items())},
                "history": [
                    {
                        "candidate_index": row.candidate_index,
                        "island_id": row.island_id,
                        "outcome": row.outcome.value,
                        "score": row.score,
                        "best_so_far": row.best_so_far,
                    }
                    for row in self.history
                ],
            }

    def state_json(self) -> str:
        return json.dumps(self.to_state(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_state(
        cls,
        state: dict[str, Any],
        config: Optional[DatabaseConfig] = None,
        *,
        event_log: Optional[EventLog] = None,
    ) -> "ProgramDatabase":
        db = cls(config, event_log=event_log)
        for data in state["islands"]:
            island = db.island(int(data["id"]))
            island.version = int(data.get("version", 0))
            island.created_at = float(data.get("created_at", island.created_at))
            for item in data["programs"]:
                island.add(stored_from_dict(item))
        counters = state["counters"]
        db.generated = int(counters["generated"])
        db.accepted = int(counters["accepted"])
        db.catastrophic = int(counters["catastrophic"])
        db.duplicates = int(counters["duplicates"])
        db.mutator_failures = int(counters["mutator_failures"])
        db.resets = int(counters["resets"])
        db.event_count = int(counters.get("events", 0))
        if state.get("global_best"):
            db.global_best = stored_from_dict(state["global_best"])
        db._seen = set(state.get("seen", ()))
        db._candidates = {
            key: RegisterResult(
                accepted=bool(r["accepted"]),
                outcome=Outcome(r["outcome"]),
                island_id=int(r["island_id"]),
                candidate_index=r["candidate_index"],
                content_hash=r["content_hash"],
                score=float(r["score"]),
            )
            for key, r in state.get("candidates", {}).items()
        }
        db.history = [
            TraceRow(
                candidate_index=int(row["candidate_index"]),
                island_id=row["island_id"],
                outcome=Outcome(row["outcome"]),
                score=row["score"],
                best_so_far=row["best_so_far"],
            )
            for row in state.get("history", [])
        ]
        return db

    def replay(self, path: Union[str, Path], skip: int = 0) -> int:
        """
        Apply the events of a log to this database without re-logging
        them, starting after the first `skip` events (the ones a snapshot
        already holds). Automatic resets are not replayed; registering
        the same candidates triggers them again. Returns the number of
        events applied.
        """
        count = 0
        read = 0
        self._replaying = True
        try:
            for lineno, event in read_events(path):
                read += 1
                if read <= skip:
                    continue
                try:
                    self._apply(event)
                except (AhdError, KeyError, TypeError) as e:
                    raise CorruptLog(f"cannot apply {event.get('type')} event: {e}", lineno) from e
                self.event_count += 1
                count += 1
        finally:
            self._replaying = False
        if read < skip:
            raise CorruptLog(f"log holds {read} events but the snapshot covers {skip}")
        logger.info(
            "Replayed event log",
            extra={"extra_data": {"path": str(path), "events": count, "skipped": skip}},
        )
        return count

    def _apply(self, event: dict[str, Any]) -> None:
        kind = EventType(event["type"])
        if kind is EventType.SKIP:
            self.skip(event["candidate_id"], event.get("reason", ""))
            return
        if kind is EventType.RESET:
            if not event["auto"]:
                self.genetic_reset(ResetPolicy(every=self.config.reset.every, fraction=event.get("fraction", 0.5)))
            return

        record = ScoreRecord.from_dict(event["record"])
        if kind is EventType.REGISTER and record.catastrophic:
            self.register(int(event["island"]), event["source"], record, event.get("candidate_id"))
            return

        program = parse(event["source"]).with_lineage(
            tuple(event.get("parent_hashes", ())), int(event.get("generation", 0))
        )
        if kind is EventType.SEED:
            self.seed(program, record)
        else:
            self.register(int(event["island"]), program, record, event.get("candidate_id"))


def stored_to_dict(stored: StoredProgram) -> dict[str, Any]:
    return {
        "source": stored.program.source,
        "parent_hashes": list(stored.program.parent_hashes),
        "generation": stored.program.generation,
        "record": stored.record.to_dict(),
    }


def stored_from_dict(data: dict[str, Any]) -> StoredProgram:
    program = parse(data["source"]).with_lineage(
        tuple(data.get("parent_hashes", ())), int(data.get("generation", 0))
    )
    return StoredProgram(program, ScoreRecord.from_dict(data["record"]))


def open_database(
    config: DatabaseConfig,
    log_path: Optional[Union[str, Path]] = None,
    snapshot: Optional[dict[str, Any]] = None,
) -> ProgramDatabase:
    """
    Database backed by an event log. With a snapshot state it starts from
    the snapshot and replays only the events logged after it; a snapshot
    that does not fit the log falls back to replaying the whole log.
    """
    if snapshot is not None and "events" not in snapshot.get("counters", {}):
        logger.warning("Snapshot has no event count; ignoring it")
        snapshot = None
    if log_path is None:
        return ProgramDatabase(config) if snapshot is None else ProgramDatabase.from_state(snapshot, config)

    db: Optional[ProgramDatabase] = None
    if snapshot is not None:
        db = ProgramDatabase.from_state(snapshot, config)
        try:
            db.replay(log_path, skip=db.event_count)
        except CorruptLog as e:
            logger.warning(
                "Snapshot does not match the event log; replaying the full log",
                extra={"extra_data": {"path": str(log_path), "error": str(e)}},
            )
            db = None
    if db is None:
        db = ProgramDatabase(config)
        db.replay(log_path)
    db.event_log = EventLog(log_path)
    return db
