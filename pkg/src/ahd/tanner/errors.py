"""Tanner module errors."""

from ahd.errors import AhdError, LengthMismatch


class InvalidSpec(AhdError):
    """Code spec violates its structural invariants."""


class EncodeSingular(AhdError):
    """Parity part cannot be solved for the given code."""


__all__ = ["InvalidSpec", "EncodeSingular", "LengthMismatch"]
