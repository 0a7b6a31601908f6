"""Hierarchical candidate scoring and the fixed evaluation protocol."""

from .errors import ContextSimulationError, NoIntermediateZone
from .models import (
    BER_WEIGHT,
    CATASTROPHIC_WEIGHT,
    DEFAULT_CONTEXT,
    ITERATION_WEIGHT,
    MAX_PROTOCOL_TBS,
    UNDECODED_WEIGHT,
    ComparisonRow,
    EvalProtocol,
    GeneralizationRow,
    GridPoint,
    ScoreRecord,
    compute_score,
)
from .service import (
    compare_kernels,
    decode_context,
    generalization_check,
    link_frames,
    pick_boundary_context,
    protocol_hash,
    score_candidate,
    sweep_grid,
    trial_seed,
)

__all__ = [
    "ContextSimulationError",
    "NoIntermediateZone",
    "BER_WEIGHT",
    "CATASTROPHIC_WEIGHT",
    "DEFAULT_CONTEXT",
    "ITERATION_WEIGHT",
    "MAX_PROTOCOL_TBS",
    "UNDECODED_WEIGHT",
    "ComparisonRow",
    "EvalProtocol",
    "GeneralizationRow",
    "GridPoint",
    "ScoreRecord",
    "compute_score",
    "compare_kernels",
    "decode_context",
    "generalization_check",
    "link_frames",
    "pick_boundary_context",
    "protocol_hash",
    "score_candidate",
    "sweep_grid",
    "trial_seed",
]
