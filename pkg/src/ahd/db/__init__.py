"""
Snapshot Store

SQLAlchemy persistence for island database snapshots.
"""

from .base import Base, init_db, make_engine, make_session_factory, session_scope
from .models import IslandSnapshotModel, RunModel
from .repository import BaseRepository, RunRepository, SnapshotRepository

__all__ = [
    "Base",
    "init_db",
    "make_engine",
    "make_session_factory",
    "session_scope",
    "IslandSnapshotModel",
    "RunModel",
    "BaseRepository",
    "RunRepository",
    "SnapshotRepository",
]
