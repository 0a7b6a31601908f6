"""
Service Clients

Async httpx clients for the database and evaluator services. Connection
errors and 503 answers are retried with exponential backoff; other error
statuses raise ServiceError.
"""

import asyncio
import logging
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Optional

import httpx

from ahd.evolution import StoredProgram, stored_from_dict
from ahd.kernelscript import KernelProgram
from ahd.scoring import ScoreRecord

from .errors import EnvelopeError, ServiceError, ServiceUnavailable
from .models import (
    CandidatePayload,
    MessageKind,
    RegisterPayload,
    ResetPayload,
    SkipPayload,
    WireEnvelope,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff: base_delay * 2**attempt, capped at max_delay."""
    max_retries: int = 8
    base_delay: float = 0.5
    max_delay: float = 30.0

    def delay(self, attempt: int) -> float:
        return min(self.base_delay * (2 ** attempt), self.max_delay)


class ServiceClient:
    """Envelope-speaking HTTP client with retries."""

    def __init__(
        self,
        base_url: str,
        api_key: Optional[str] = None,
        timeout: float = 30.0,
        retry: Optional[RetryPolicy] = None,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retry = retry or RetryPolicy()
        self.headers = {"Content-Type": "application/json"}
        if api_key:
            self.headers["X-API-Key"] = api_key
        self._transport = transport
        self._sleep = sleep
        self._client: Optional[httpx.AsyncClient] = None

    async def _get_client(self) -> httpx.AsyncClient:
        """Get or create HTTP client."""
        if self._client is None:
            self._client = httpx.AsyncClient(
                base_url=self.base_url,
                headers=self.headers,
                timeout=self.timeout,
                transport=self._transport,
            )
        return self._client

    async def close(self) -> None:
        """Close HTTP client."""
        if self._client:
            await self._client.aclose()
            self._client = None

    async def __aenter__(self) -> "ServiceClient":
        return self

    async def __aexit__(self, *exc: object) -> None:
        await self.close()

    async def request(
        self,
        method: str,
        path: str,
        *,
        params: Optional[dict[str, Any]] = None,
        envelope: Optional[WireEnvelope] = None,
    ) -> WireEnvelope:
        client = await self._get_client()
        body = envelope.model_dump(mode="json") if envelope else None
        # the candidate id doubles as request id in the services' logs
        headers = {"X-Request-ID": envelope.idempotency_key} if envelope and envelope.idempotency_key else None
        attempt = 0
        while True:
            try:
                response = await client.request(method, path, params=params, json=body, headers=headers)
            except httpx.TransportError as e:
                reason = f"{type(e).__name__}: {e}"
            else:
                if response.status_code != 503:
                    return self._unwrap(response)
                reason = "HTTP 503"

            if attempt >= self.retry.max_retries:
                raise ServiceUnavailable(f"{method} {self.base_url}{path} failed: {reason}")
            delay = self.retry.delay(attempt)
            logger.warning(
                "Service call failed, retrying",
                extra={"extra_data": {
                    "url": f"{self.base_url}{path}",
                    "attempt": attempt + 1,
                    "delay_s": delay,
                    "reason": reason,
                }},
            )
            await self._sleep(delay)
            attempt += 1

    @staticmethod
    def _unwrap(response: httpx.Response) -> WireEnvelope:
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            raise ServiceError(response.status_code, str(detail))
        try:
            return WireEnvelope.model_validate(response.json())
        except ValueError as e:
            raise EnvelopeError(f"Malformed envelope from service: {e}") from e


class DbClient(ServiceClient):
    """Client of the program database service."""

    async def sample(self, island: int, count: int, seed: int) -> list[StoredProgram]:
        envelope = await self.request(
            "GET", "/v1/sample", params={"island": island, "count": count, "seed": seed}
        )
        return [stored_from_dict(p) for p in envelope.payload["programs"]]

    async def register(
        self,
        island: int,
        program: KernelProgram | str,
        record: ScoreRecord,
        candidate_id: Optional[str] = None,
    ) -> dict[str, Any]:
        if isinstance(program, KernelProgram):
            payload = RegisterPayload(
                source=program.source,
                island=island,
                candidate_id=candidate_id,
                parent_hashes=list(program.parent_hashes),
                generation=program.generation,
                record=record.to_dict(),
                protocol_hash=record.protocol_hash,
            )
            key = candidate_id or program.content_hash
        else:
            payload = RegisterPayload(
                source=program,
                island=island,
                candidate_id=candidate_id,
                record=record.to_dict(),
                protocol_hash=record.protocol_hash,
            )
            key = candidate_id
        envelope = await self.request(
            "POST",
            "/v1/register",
            envelope=WireEnvelope.wrap(MessageKind.SCORE_REPORT, payload, idempotency_key=key),
        )
        return envelope.payload

    async def skip(self, candidate_id: str, reason: str = "") -> dict[str, Any]:
        envelope = await self.request(
            "POST",
            "/v1/skip",
            envelope=WireEnvelope.wrap(
                MessageKind.SCORE_REPORT,
                SkipPayload(candidate_id=candidate_id, reason=reason),
                idempotency_key=candidate_id,
            ),
        )
        return envelope.payload

    async def reset(self, fraction: Optional[float] = None) -> dict[str, Any]:
        envelope = await self.request(
            "POST",
            "/v1/reset",
            envelope=WireEnvelope.wrap(MessageKind.RESET_COMMAND, ResetPayload(fraction=fraction)),
        )
        return envelope.payload

    async def stats(self) -> dict[str, Any]:
        return (await self.request("GET", "/v1/stats")).payload

    async def health(self) -> dict[str, Any]:
        return (await self.request("GET", "/v1/health")).payload


class EvaluatorClient(ServiceClient):
    """Client of an evaluator service."""

    async def evaluate(self, candidate: CandidatePayload) -> dict[str, Any]:
        envelope = await self.request(
            "POST",
            "/v1/evaluate",
            envelope=WireEnvelope.wrap(
                MessageKind.CANDIDATE_SUBMISSION, candidate, idempotency_key=candidate.candidate_id
            ),
        )
        return envelope.payload
