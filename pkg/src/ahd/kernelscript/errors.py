"""KernelScript errors."""

from typing import Optional

from ahd.errors import AhdError

from .models import FaultKind


class KernelSyntaxError(AhdError):
    """Source text does not follow the grammar."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ValidationError(AhdError):
    """Well-formed source using an unknown name or a non-whitelisted operation."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"{message} (line {line})")


class SandboxFault(AhdError):
    """Evaluation aborted: timeout, op budget or non-finite output."""

    def __init__(self, kind: FaultKind, message: str = ""):
        self.kind = kind
        super().__init__(f"{kind.value}: {message}" if message else kind.value)
