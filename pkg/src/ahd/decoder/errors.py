"""Decoder errors."""

from typing import Optional

from ahd.errors import AhdError, LengthMismatch


class NonPositiveClip(AhdError):
    """Clip magnitude must be positive."""


class NonFiniteInput(AhdError):
    """NaN or infinite LLR handed to the hard decision."""


class KernelFault(AhdError):
    """
    The CNU kernel failed (sandbox or numeric fault). Distinct from an
    ordinary decoding failure, which is reported in the DecodeReport.
    """

    def __init__(self, message: str, kind: Optional[str] = None):
        super().__init__(message)
        self.kind = kind


__all__ = ["NonPositiveClip", "NonFiniteInput", "KernelFault", "LengthMismatch"]
