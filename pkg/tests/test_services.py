"""
Services Tests

Tests for mutators, prompt rendering, the retrying service client, the
sampler and local evolution runs.
"""

import asyncio
import json

import httpx
import pytest
from pydantic import ValidationError

from ahd.api.app import create_db_app, create_evaluator_app
from ahd.evolution import ProgramDatabase, StoredProgram
from ahd.kernelscript import parse, seed_program
from ahd.services import (
    DbClient,
    EvaluatorClient,
    LlmBadResponse,
    LlmTimeout,
    MessageKind,
    MutatorConfig,
    RetryPolicy,
    Sampler,
    SamplerSettings,
    ServiceError,
    ServiceUnavailable,
    WireEnvelope,
    llm_mutate,
    load_snapshot,
    load_template,
    mock_mutate,
    prepare_database,
    render_prompt,
    round_seeds,
    run_local,
    sampler_loop,
    save_snapshot,
)
from ahd.services.errors import EnvelopeError
from ahd.services.models import DEFAULT_PROMPT_TEMPLATE
from tests.conftest import make_record, numbered_program


def stored(value: float, penalty: float) -> StoredProgram:
    return StoredProgram(numbered_program(value), make_record(penalty))


def distinct_programs(db: ProgramDatabase) -> int:
    return len({p.content_hash for island in db.islands for p in island.programs()})


def chat_response(content) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": content}}]})


async def no_sleep(delay: float) -> None:
    pass


# =============================================================================
# Mutator Tests
# =============================================================================


class TestMockMutate:
    """Tests for the deterministic mock mutator."""

    def test_deterministic(self):
        programs = [stored(2, 50), stored(3, 10)]
        config = MutatorConfig()
        assert mock_mutate(config, programs, 5) == mock_mutate(config, programs, 5)

    def test_output_parses(self):
        programs = [StoredProgram(seed_program("min-sum"), make_record(20))]
        for seed in range(20):
            parse(mock_mutate(MutatorConfig(), programs, seed))

    def test_order_independent(self):
        a, b = stored(2, 50), stored(3, 10)
        config = MutatorConfig()
        assert mock_mutate(config, [a, b], 1) == mock_mutate(config, [b, a], 1)

    def test_needs_programs(self):
        with pytest.raises(ValueError):
            mock_mutate(MutatorConfig(), [], 0)


class TestLlmMutate:
    """Tests for the chat-completions mutator."""

    def config(self) -> MutatorConfig:
        return MutatorConfig(mode="llm", endpoint="http://llm.test/v1/chat/completions/", request_timeout=1.0)

    def test_endpoint_required(self):
        with pytest.raises(ValidationError):
            MutatorConfig(mode="llm")

    def test_endpoint_stripped(self):
        assert self.config().endpoint == "http://llm.test/v1/chat/completions"

    async def test_returns_content(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["body"] = json.loads(request.content)
            return chat_response("x = L\nreturn x")

        async with httpx.AsyncClient(transport=httpx.MockTransport(handler)) as client:
            text = await llm_mutate(self.config(), "prompt text", client)
        assert text == "x = L\nreturn x"
        assert seen["body"]["messages"][1] == {"role": "user", "content": "prompt text"}

    async def test_error_status(self):
        async with httpx.AsyncClient(transport=httpx.MockTransport(lambda r: httpx.Response(500))) as client:
            with pytest.raises(LlmBadResponse):
                await llm_mutate(self.config(), "p", client)

    async def test_timeout(self):
        def handler(request: httpx.Request) -> httpx.Response:
            raise httpx.ReadTimeout("slow", request=request)

        async with httpx.AsyncClient(transport=httpx.MockTransport(handler)) as client:
            with pytest.raises(LlmTimeout):
                await llm_mutate(self.config(), "p", client)

    async def test_missing_choices(self):
        async with httpx.AsyncClient(
            transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"choices": []}))
        ) as client:
            with pytest.raises(LlmBadResponse):
                await llm_mutate(self.config(), "p", client)

    async def test_non_text_content(self):
        async with httpx.AsyncClient(transport=httpx.MockTransport(lambda r: chat_response(None))) as client:
            with pytest.raises(LlmBadResponse):
                await llm_mutate(self.config(), "p", client)


class TestPrompt:
    """Tests for prompt rendering."""

    def test_best_last(self):
        template = load_template(DEFAULT_PROMPT_TEMPLATE)
        prompt = render_prompt(template, [stored(3, 10), stored(2, 50), stored(4, 30)])
        worst = prompt.index(numbered_program(2).source)
        middle = prompt.index(numbered_program(4).source)
        best = prompt.index(numbered_program(3).source)
        assert worst < middle < best
        assert "rule_v2 (score -10)" in prompt
        assert "better than rule_v2" in prompt
        assert "at most 64 assignments" in prompt

    def test_needs_programs(self):
        with pytest.raises(ValueError):
            render_prompt(load_template(DEFAULT_PROMPT_TEMPLATE), [])


# =============================================================================
# Client Tests
# =============================================================================


def stats_envelope() -> dict:
    return WireEnvelope.wrap(MessageKind.STATS_RESPONSE, {"total_candidates": 3}).model_dump(mode="json")


class TestServiceClient:
    """Tests for retries and error mapping."""

    async def test_retries_503(self):
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(request.url.path)
            if len(calls) < 3:
                return httpx.Response(503)
            return httpx.Response(200, json=stats_envelope())

        delays = []

        async def sleep(delay: float) -> None:
            delays.append(delay)

        client = DbClient("http://db.test", transport=httpx.MockTransport(handler), sleep=sleep)
        assert (await client.stats())["total_candidates"] == 3
        await client.close()
        assert calls == ["/v1/stats"] * 3
        assert delays == [0.5, 1.0]

    async def test_retries_connection_errors(self):
        attempts = []

        def handler(request: httpx.Request) -> httpx.Response:
            attempts.append(1)
            if len(attempts) == 1:
                raise httpx.ConnectError("refused", request=request)
            return httpx.Response(200, json=stats_envelope())

        client = DbClient("http://db.test", transport=httpx.MockTransport(handler), sleep=no_sleep)
        await client.stats()
        await client.close()
        assert len(attempts) == 2

    async def test_gives_up(self):
        client = DbClient(
            "http://db.test",
            transport=httpx.MockTransport(lambda r: httpx.Response(503)),
            retry=RetryPolicy(max_retries=2),
            sleep=no_sleep,
        )
        with pytest.raises(ServiceUnavailable):
            await client.stats()
        await client.close()

    async def test_client_errors_not_retried(self):
        calls = []

        def handler(request: httpx.Request) -> httpx.Response:
            calls.append(1)
            return httpx.Response(409, json={"detail": "protocol mismatch"})

        client = DbClient("http://db.test", transport=httpx.MockTransport(handler), sleep=no_sleep)
        with pytest.raises(ServiceError) as info:
            await client.stats()
        await client.close()
        assert info.value.status_code == 409
        assert info.value.detail == "protocol mismatch"
        assert len(calls) == 1

    async def test_malformed_envelope(self):
        client = DbClient(
            "http://db.test",
            transport=httpx.MockTransport(lambda r: httpx.Response(200, json={"kind": "bogus"})),
            sleep=no_sleep,
        )
        with pytest.raises(EnvelopeError):
            await client.stats()
        await client.close()

    async def test_api_key_header(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["key"] = request.headers.get("X-API-Key")
            return httpx.Response(200, json=stats_envelope())

        client = DbClient("http://db.test", api_key="k1", transport=httpx.MockTransport(handler))
        await client.stats()
        await client.close()
        assert seen["key"] == "k1"

    def test_backoff_cap(self):
        policy = RetryPolicy(base_delay=1.0, max_delay=5.0)
        assert [policy.delay(a) for a in range(5)] == [1.0, 2.0, 4.0, 5.0, 5.0]


# =============================================================================
# Sampler Tests
# =============================================================================


class TestSamplerSettings:
    """Tests for per-round derivations."""

    def test_round_seeds_deterministic(self):
        assert round_seeds(1, 0, 5) == round_seeds(1, 0, 5)
        assert round_seeds(1, 0, 5) != round_seeds(1, 1, 5)
        assert round_seeds(1, 0, 5) != round_seeds(1, 0, 6)

    def test_candidate_ids(self):
        assert SamplerSettings(n_islands=2).candidate_id(4) == "r4"
        assert SamplerSettings(n_islands=2, sampler_id=1, n_samplers=2).candidate_id(4) == "s1-r4"

    def test_island_rotation(self):
        settings = SamplerSettings(n_islands=3, sampler_id=1, n_samplers=2)
        assert [settings.island(r) for r in range(4)] == [1, 2, 0, 1]


class TestSampler:
    """Tests for one sampler round against an in-process database."""

    async def test_llm_failure_skips_round(self, run_config, database):
        db_client = DbClient("http://ahd-db", transport=httpx.ASGITransport(app=create_db_app(run_config, database)))
        llm = httpx.AsyncClient(transport=httpx.MockTransport(lambda r: httpx.Response(500)))
        sampler = Sampler(
            MutatorConfig(mode="llm", endpoint="http://llm.test/chat"),
            SamplerSettings(n_islands=4),
            db_client,
            [EvaluatorClient("http://unused.test")],
            llm_client=llm,
        )
        result = await sampler.run_round(0)
        await llm.aclose()
        await db_client.close()
        assert result["outcome"] == "skipped"
        assert database.mutator_failures == 1
        assert database.generated == 1

    def test_needs_evaluator(self, run_config):
        with pytest.raises(ValueError):
            Sampler(run_config.mutator, SamplerSettings(n_islands=2), DbClient("http://x"), [])


class OutageDb:
    """Database client stand-in that is unreachable for its first `down` calls of one kind."""

    def __init__(self, down_on: str, down: int = 1):
        self.down_on = down_on
        self.down = down
        self.skips: list[str] = []

    def _maybe_fail(self, kind: str) -> None:
        if kind == self.down_on and self.down > 0:
            self.down -= 1
            raise ServiceUnavailable(f"{kind}: database down")

    async def stats(self) -> dict:
        self._maybe_fail("stats")
        return {"total_candidates": len(self.skips)}

    async def skip(self, candidate_id: str, reason: str = "") -> dict:
        self._maybe_fail("skip")
        self.skips.append(candidate_id)
        return {"outcome": "skipped"}


class RejectingSampler:
    """Sampler whose every round is rejected by the evaluator."""

    def __init__(self, db: OutageDb):
        self.db = db
        self.settings = SamplerSettings(n_islands=1)
        self.rounds: list[int] = []

    async def run_round(self, round_index: int) -> dict:
        self.rounds.append(round_index)
        raise ServiceError(422, "candidate rejected")


class TestSamplerLoop:
    """Tests for round retries when the database is unreachable."""

    async def test_skip_outage_retries_round(self):
        """Test that a failed skip record backs off and the loop carries on."""
        db = OutageDb("skip", down=2)
        sampler = RejectingSampler(db)
        next_round = await sampler_loop(sampler, budget=2, retry=RetryPolicy(base_delay=0.0))
        assert next_round == 2
        assert db.skips == ["r0", "r1"]
        assert sampler.rounds == [0, 0, 0, 1]

    async def test_stats_outage_retried(self):
        db = OutageDb("stats")
        sampler = RejectingSampler(db)
        assert await sampler_loop(sampler, budget=1, retry=RetryPolicy(base_delay=0.0)) == 1
        assert db.skips == ["r0"]

    async def test_fatal_status_raises(self):
        class LockedOut(RejectingSampler):
            async def run_round(self, round_index: int) -> dict:
                raise ServiceError(401, "bad api key")

        with pytest.raises(ServiceError):
            await sampler_loop(LockedOut(OutageDb("none")), budget=1)


# =============================================================================
# Local Run Tests
# =============================================================================


class TestRunLocal:
    """Tests for in-process evolution runs."""

    async def test_budget_and_accounting(self, run_config):
        db = await run_local(run_config)
        stats = db.stats()
        assert stats["total_candidates"] == run_config.budget
        assert stats["accepted"] + stats["catastrophic"] + stats["skipped"] == stats["total_candidates"]
        assert len(db.history) == run_config.budget
        assert db.global_best is not None
        assert db.global_best.score >= db.islands[0].clusters[min(db.islands[0].clusters)].score

    async def test_deterministic(self, run_config):
        first = await run_local(run_config)
        second = await run_local(run_config)
        assert first.state_json() == second.state_json()

    async def test_best_never_regresses(self, run_config):
        db = await run_local(run_config)
        best = [row.best_so_far for row in db.history]
        assert all(b is not None for b in best)
        assert best == sorted(best)

    async def test_restart_resumes_exactly(self, run_config, tmp_path):
        """Test that an interrupted run resumed from its log ends in the same state."""
        full = await run_local(run_config, event_log=tmp_path / "full.jsonl")

        log = tmp_path / "resumed.jsonl"
        await run_local(run_config, event_log=log, budget=5)
        resumed_db = prepare_database(run_config, log)
        assert resumed_db.generated == 5
        resumed = await run_local(run_config, database=resumed_db)
        assert resumed.state_json() == full.state_json()

    async def test_restart_from_snapshot(self, run_config, tmp_path):
        """Test that a restart through a saved snapshot matches an uninterrupted run."""
        full = await run_local(run_config, event_log=tmp_path / "full.jsonl")

        log = tmp_path / "resumed.jsonl"
        url = f"sqlite:///{tmp_path / 'snapshots.db'}"
        partial = await run_local(run_config, event_log=log, budget=5)
        save_snapshot(url, "run-a", partial)
        await run_local(run_config, database=partial, budget=7)
        assert load_snapshot(url, "run-a", run_config.protocol_hash())["counters"]["generated"] == 5

        resumed_db = prepare_database(run_config, log, snapshot_url=url, run_id="run-a")
        assert resumed_db.generated == 7
        assert resumed_db.state_json() == partial.state_json()
        resumed = await run_local(run_config, database=resumed_db)
        assert resumed.state_json() == full.state_json()

    async def test_two_samplers(self, run_config):
        config = run_config.model_copy(update={"n_samplers": 2, "budget": 8})
        db = await run_local(config)
        stats = db.stats()
        assert config.budget <= stats["total_candidates"] <= config.budget + 1
        assert stats["accepted"] + stats["catastrophic"] + stats["skipped"] == stats["total_candidates"]
        assert {row.island_id for row in db.history} <= {0, 1, None}


class DoubleSubmitEvaluator(EvaluatorClient):
    """Evaluator client that delivers every candidate twice."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.candidate_ids: list[str] = []
        self.second_replies: list[dict] = []

    async def evaluate(self, candidate):
        await super().evaluate(candidate)
        reply = await super().evaluate(candidate)
        self.candidate_ids.append(candidate.candidate_id)
        self.second_replies.append(reply)
        return reply


class TestDistributedIntegrity:
    """Two samplers and three evaluators sharing one database."""

    async def test_duplicate_submissions_counted_once(self, run_config, tmp_path):
        config = run_config.model_copy(update={"n_samplers": 2, "budget": 10})
        log = tmp_path / "events.jsonl"
        db = prepare_database(config, log)
        db_client = DbClient("http://ahd-db", transport=httpx.ASGITransport(app=create_db_app(config, db)))
        evaluators = [
            DoubleSubmitEvaluator(
                f"http://ahd-evaluator-{i}",
                transport=httpx.ASGITransport(app=create_evaluator_app(config, db_client=db_client)),
            )
            for i in range(3)
        ]
        samplers = [
            Sampler(config.mutator, SamplerSettings(config.n_islands, config.seed, i, 2), db_client, evaluators)
            for i in range(2)
        ]
        await asyncio.gather(*(sampler_loop(s, budget=config.budget) for s in samplers))
        for evaluator in evaluators:
            await evaluator.close()
        await db_client.close()

        submitted = [cid for e in evaluators for cid in e.candidate_ids]
        assert all(e.candidate_ids for e in evaluators)
        assert len(submitted) == len(set(submitted))
        assert all(r["register"]["outcome"] == "replayed" for e in evaluators for r in e.second_replies)

        stats = db.stats()
        assert stats["total_candidates"] == len(submitted) + db.mutator_failures
        assert stats["accepted"] + stats["catastrophic"] + stats["skipped"] == stats["total_candidates"]

        single_writer = ProgramDatabase(db.config)
        single_writer.replay(log)
        assert distinct_programs(single_writer) == distinct_programs(db)
        assert single_writer.state_json() == db.state_json()


class TestRequestIds:
    """Tests for request ids sent by the clients."""

    async def test_candidate_id_sent_as_request_id(self):
        seen = {}

        def handler(request: httpx.Request) -> httpx.Response:
            seen["id"] = request.headers.get("X-Request-ID")
            payload = {"outcome": "skipped", "candidate_index": 0, "recorded": True}
            return httpx.Response(
                200, json=WireEnvelope.wrap(MessageKind.SCORE_REPORT, payload).model_dump(mode="json")
            )

        client = DbClient("http://db.test", transport=httpx.MockTransport(handler))
        await client.skip("s1-r7", "LlmTimeout")
        await client.close()
        assert seen["id"] == "s1-r7"
