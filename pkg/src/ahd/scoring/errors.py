"""Scoring errors."""

from ahd.errors import AhdError
from ahd.phy import Context


class NoIntermediateZone(AhdError):
    """No swept context lies inside the success-fraction band."""


class ContextSimulationError(AhdError):
    """A simulation failed at a specific context."""

    def __init__(self, context: Context, cause: Exception):
        self.context = context
        self.cause = cause
        super().__init__(
            f"n_prb={context.n_prb} mcs_index={context.mcs_index} "
            f"snr_db={context.snr_db:g}: {cause}"
        )
