"""
Evaluator Worker

Scores candidate submissions under the run's fixed protocol and reports
them to the database. Evaluators hold no state; register is idempotent,
so a submission delivered twice is counted once.
"""

import logging
import time
from typing import Any, Union

from starlette.concurrency import run_in_threadpool

from ahd.api.metrics import EVALUATION_SECONDS
from ahd.kernelscript import KernelProgram, KernelSyntaxError, ValidationError, extract_source, parse
from ahd.scoring import EvalProtocol, ScoreRecord, protocol_hash, score_candidate

from .client import DbClient
from .models import CandidatePayload

logger = logging.getLogger(__name__)


class Evaluator:
    """Thin wrapper around score_candidate plus the register call."""

    def __init__(self, protocol: EvalProtocol, db: DbClient):
        self.protocol = protocol
        self.protocol_hash = protocol_hash(protocol)
        self.db = db

    def score(self, candidate: CandidatePayload) -> tuple[Union[KernelProgram, str], ScoreRecord]:
        """Parse and score; unparseable text is scored (catastrophic) as-is."""
        text = extract_source(candidate.source)
        try:
            program = parse(text).with_lineage(tuple(candidate.parent_hashes), candidate.generation)
        except (KernelSyntaxError, ValidationError):
            return text, score_candidate(text, self.protocol)
        return program, score_candidate(program, self.protocol)

    async def evaluate(self, candidate: CandidatePayload) -> dict[str, Any]:
        started = time.perf_counter()
        program, record = await run_in_threadpool(self.score, candidate)
        EVALUATION_SECONDS.observe(time.perf_counter() - started)

        result = await self.db.register(candidate.island, program, record, candidate.candidate_id)
        logger.info(
            "Candidate evaluated",
            extra={"extra_data": {
                "candidate_id": candidate.candidate_id,
                "island": candidate.island,
                "score": record.score,
                "catastrophic": bool(record.catastrophic),
                "outcome": result["outcome"],
            }},
        )
        return {"record": record.to_dict(), "register": result}
