"""Island-model program database with temperature sampling and genetic resets."""

from .database import ProgramDatabase, open_database, stored_from_dict, stored_to_dict
from .errors import CorruptLog, EmptyIsland, ProtocolMismatch, ResetInProgress, UnknownIsland
from .events import EventLog, read_events
from .models import (
    SCORE_DECIMALS,
    Cluster,
    DatabaseConfig,
    EventType,
    Island,
    Outcome,
    RegisterResult,
    ResetEntry,
    ResetPolicy,
    ResetReport,
    StoredProgram,
    TraceRow,
    cluster_key,
)

__all__ = [
    "ProgramDatabase",
    "open_database",
    "stored_from_dict",
    "stored_to_dict",
    "CorruptLog",
    "EmptyIsland",
    "ProtocolMismatch",
    "ResetInProgress",
    "UnknownIsland",
    "EventLog",
    "read_events",
    "SCORE_DECIMALS",
    "Cluster",
    "DatabaseConfig",
    "EventType",
    "Island",
    "Outcome",
    "RegisterResult",
    "ResetEntry",
    "ResetPolicy",
    "ResetReport",
    "StoredProgram",
    "TraceRow",
    "cluster_key",
]
