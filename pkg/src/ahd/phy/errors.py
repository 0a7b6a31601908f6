"""PHY module errors."""

from ahd.errors import AhdError, LengthMismatch


class BadLength(AhdError):
    """Bit count incompatible with the modulation order."""


class NonPositiveNoise(AhdError):
    """Noise variance must be strictly positive."""


class IndexOutOfRange(AhdError):
    """Position outside the codeword."""


class InvalidContext(AhdError):
    """Context cannot be mapped to a transport block."""


__all__ = ["BadLength", "NonPositiveNoise", "IndexOutOfRange", "InvalidContext", "LengthMismatch"]
