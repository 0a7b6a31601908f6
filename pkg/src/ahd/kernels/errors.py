"""Kernel module errors."""

from ahd.errors import AhdError


class NumericFault(AhdError):
    """A kernel produced a non-finite output."""


class UnknownKernel(AhdError):
    """Kernel name not present in the registry."""
