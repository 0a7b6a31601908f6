"""Evolution database errors."""

from typing import Optional

from ahd.errors import AhdError


class UnknownIsland(AhdError):
    """Island id outside the database."""


class ProtocolMismatch(AhdError):
    """Score record produced under a different evaluation protocol."""


class EmptyIsland(AhdError):
    """Sampling from an island that holds no programs."""


class ResetInProgress(AhdError):
    """Writes are refused while a genetic reset runs."""


class CorruptLog(AhdError):
    """Unreadable event log line."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
