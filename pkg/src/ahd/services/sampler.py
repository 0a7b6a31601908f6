"""
Sampler Worker

One round: sample k programs from an island, render the prompt, call the
mutator and submit the result to an evaluator. Round r draws all of its
randomness from (seed, sampler id, r), so a restarted sampler resuming at
the database's candidate count repeats the rounds it missed exactly.
"""

import asyncio
import logging
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import httpx
import numpy as np

from ahd.api.metrics import LLM_FAILURES

from .client import DbClient, EvaluatorClient, RetryPolicy
from .errors import EnvelopeError, LlmBadResponse, LlmTimeout, ServiceError, ServiceUnavailable
from .models import CandidatePayload, MutatorConfig, MutatorMode
from .mutator import llm_mutate, mock_mutate
from .prompts import load_template, render_prompt

logger = logging.getLogger(__name__)

FATAL_STATUSES = {401, 409}


def round_seeds(seed: int, sampler_id: int, round_index: int) -> tuple[int, int]:
    """(sample seed, mutation seed) of one round."""
    state = np.random.SeedSequence([seed, sampler_id, round_index]).generate_state(2)
    return int(state[0]), int(state[1])


@dataclass(frozen=True)
class SamplerSettings:
    n_islands: int
    seed: int = 0
    sampler_id: int = 0
    n_samplers: int = 1

    def candidate_id(self, round_index: int) -> str:
        if self.n_samplers == 1:
            return f"r{round_index}"
        return f"s{self.sampler_id}-r{round_index}"

    def island(self, round_index: int) -> int:
        return (round_index + self.sampler_id) % self.n_islands


class Sampler:
    def __init__(
        self,
        config: MutatorConfig,
        settings: SamplerSettings,
        db: DbClient,
        evaluators: Sequence[EvaluatorClient],
        llm_client: Optional[httpx.AsyncClient] = None,
    ):
        if not evaluators:
            raise ValueError("A sampler needs at least one evaluator")
        self.config = config
        self.settings = settings
        self.db = db
        self.evaluators = list(evaluators)
        self.llm_client = llm_client
        self.template = load_template(config.prompt_template) if config.mode is MutatorMode.LLM else None

    async def run_round(self, round_index: int) -> dict[str, Any]:
        """Run one round; returns the database's register (or skip) result."""
        settings = self.settings
        candidate_id = settings.candidate_id(round_index)
        island = settings.island(round_index)
        sample_seed, mutate_seed = round_seeds(settings.seed, settings.sampler_id, round_index)

        programs = await self.db.sample(island, self.config.examples_per_prompt, sample_seed)
        best = max(programs, key=lambda p: (p.score, p.content_hash))

        try:
            if self.config.mode is MutatorMode.MOCK:
                text = mock_mutate(self.config, programs, mutate_seed)
            else:
                assert self.template is not None
                text = await llm_mutate(self.config, render_prompt(self.template, programs), self.llm_client)
        except (LlmTimeout, LlmBadResponse) as e:
            LLM_FAILURES.inc()
            logger.warning(
                "Mutator failed, round skipped",
                extra={"extra_data": {"candidate_id": candidate_id, "error": str(e)}},
            )
            return await self.db.skip(candidate_id, f"{type(e).__name__}: {e}")

        evaluator = self.evaluators[round_index % len(self.evaluators)]
        report = await evaluator.evaluate(CandidatePayload(
            source=text,
            island=island,
            candidate_id=candidate_id,
            parent_hashes=[best.content_hash],
            generation=best.program.generation + 1,
        ))
        return dict(report["register"])


async def sampler_loop(
    sampler: Sampler,
    *,
    start: int = 0,
    budget: Optional[int] = None,
    stop: Optional[asyncio.Event] = None,
    retry: Optional[RetryPolicy] = None,
) -> int:
    """
    Run rounds start, start+1, ... until the database has seen `budget`
    candidates or `stop` is set. Returns the next round index.

    A round that fails on transport is retried (register and skip are
    idempotent per candidate id); a round rejected by a service is logged
    and recorded as skipped. A database that is down while the skip is
    recorded gets the same backoff and the round is retried.
    """
    retry = retry or RetryPolicy()
    round_index = start
    failures = 0

    async def back_off(message: str, error: Exception) -> None:
        nonlocal failures
        delay = retry.delay(failures)
        failures += 1
        logger.error(
            message,
            extra={"extra_data": {"round": round_index, "error": str(error), "delay_s": delay}},
        )
        await asyncio.sleep(delay)

    while not (stop and stop.is_set()):
        if budget is not None:
            try:
                stats = await sampler.db.stats()
            except ServiceUnavailable as e:
                await back_off("Database unreachable, retrying", e)
                continue
            if stats["total_candidates"] >= budget:
                break
        reason: Optional[str] = None
        try:
            await sampler.run_round(round_index)
        except ServiceUnavailable as e:
            await back_off("Round failed, retrying", e)
            continue
        except ServiceError as e:
            if e.status_code in FATAL_STATUSES:
                raise
            logger.error(
                "Round rejected",
                extra={"extra_data": {"round": round_index, "status": e.status_code, "error": str(e)}},
            )
            reason = str(e)
        except EnvelopeError as e:
            logger.error("Round failed on a malformed reply", extra={"extra_data": {"error": str(e)}})
            reason = str(e)
        if reason is not None:
            try:
                await sampler.db.skip(sampler.settings.candidate_id(round_index), reason)
            except (ServiceUnavailable, EnvelopeError) as e:
                await back_off("Could not record skipped round, retrying", e)
                continue
        failures = 0
        round_index += 1
    return round_index
