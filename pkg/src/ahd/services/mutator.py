"""
Mutators

Turn a prompt (LLM mode) or the sampled programs themselves (mock mode)
into the text of a new candidate.
"""

import logging
import os
from typing import Any, Optional, Sequence, Union

import httpx
import numpy as np

from ahd.evolution import StoredProgram
from ahd.kernelscript import MutationPolicy, mutate, serialize

from .errors import LlmBadResponse, LlmTimeout
from .models import MutatorConfig

logger = logging.getLogger(__name__)

SYSTEM_PROMPT = "You write KernelScript check-node update rules. Reply with code only."


def llm_headers() -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    api_key = os.getenv("AHD_LLM_API_KEY")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    return headers


async def llm_mutate(
    config: MutatorConfig,
    prompt: str,
    client: Optional[httpx.AsyncClient] = None,
) -> str:
    """
    One chat-completions call; returns the first choice's message content.

    Raises LlmTimeout when the endpoint does not answer within
    config.request_timeout, LlmBadResponse on error statuses or bodies
    without a usable choice.
    """
    if not config.endpoint:
        raise LlmBadResponse("No LLM endpoint configured")
    body = {
        "model": config.model,
        "messages": [
            {"role": "system", "content": SYSTEM_PROMPT},
            {"role": "user", "content": prompt},
        ],
        "temperature": config.temperature,
    }
    owned = client is None
    http = client or httpx.AsyncClient(timeout=config.request_timeout)
    try:
        response = await http.post(
            config.endpoint,
            json=body,
            headers=llm_headers(),
            timeout=config.request_timeout,
        )
    except httpx.TimeoutException as e:
        raise LlmTimeout(f"LLM request timed out after {config.request_timeout}s") from e
    except httpx.HTTPError as e:
        raise LlmBadResponse(f"LLM request failed: {e}") from e
    finally:
        if owned:
            await http.aclose()

    if response.status_code >= 400:
        raise LlmBadResponse(f"LLM endpoint returned HTTP {response.status_code}")
    try:
        data: Any = response.json()
        content = data["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as e:
        raise LlmBadResponse("LLM response has no choices[0].message.content") from e
    if not isinstance(content, str):
        raise LlmBadResponse("LLM message content is not text")
    return content


def mock_mutate(
    config: MutatorConfig,
    programs: Sequence[StoredProgram],
    seed: Union[int, Sequence[int], np.random.Generator],
    policy: Optional[MutationPolicy] = None,
) -> str:
    """
    Deterministic stand-in for the LLM: mutate the best sampled program,
    splicing from the others.
    """
    if not programs:
        raise ValueError("mock_mutate needs at least one sampled program")
    ordered = sorted(programs, key=lambda p: (p.score, p.content_hash))
    best = ordered[-1]
    donors = [p.program for p in ordered[:-1]]
    child = mutate(best.program, seed, policy, donors)
    return serialize(child)
