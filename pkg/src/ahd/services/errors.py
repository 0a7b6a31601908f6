"""Service and transport errors."""

from typing import Optional

from ahd.errors import AhdError


class EnvelopeError(AhdError):
    """Malformed or unsupported wire envelope."""


class LlmTimeout(AhdError):
    """The LLM endpoint did not answer within the request timeout."""


class LlmBadResponse(AhdError):
    """The LLM endpoint answered with an error status or an unusable body."""


class ServiceError(AhdError):
    """A service answered with a non-retryable error status."""

    def __init__(self, status_code: int, detail: Optional[str] = None):
        self.status_code = status_code
        self.detail = detail
        super().__init__(f"HTTP {status_code}: {detail or 'error'}")


class ServiceUnavailable(AhdError):
    """A service stayed unreachable after all retries."""
