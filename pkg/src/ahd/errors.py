"""
Error Hierarchy

Root of every domain error raised by the ahd packages.
"""


class AhdError(ValueError):
    """Base class for domain errors."""


class ConfigError(AhdError):
    """Invalid run configuration."""


class LengthMismatch(AhdError):
    """A vector does not have the length its graph or frame requires."""
