"""
Repositories

Generic repository base class plus the island snapshot repository.
"""

from __future__ import annotations

import json
import logging
from typing import Any, Generic, Optional, Type, TypeVar
from uuid import uuid4

from sqlalchemy import select
from sqlalchemy.orm import Session

from ahd.evolution import DatabaseConfig, ProgramDatabase

from .base import Base
from .models import IslandSnapshotModel, RunModel

logger = logging.getLogger(__name__)

T = TypeVar("T", bound=Base)


class BaseRepository(Generic[T]):
    """get / list / create shared by the snapshot store tables."""

    def __init__(self, session: Session, model_class: Type[T]):
        self.session = session
        self.model_class = model_class

    def get(self, id: str) -> Optional[T]:
        return self.session.get(self.model_class, id)

    def list(self, limit: int = 100, **filters: Any) -> list[T]:
        """Rows matching every non-None column filter."""
        stmt = select(self.model_class)
        for key, value in filters.items():
            if value is not None:
                stmt = stmt.filter(getattr(self.model_class, key) == value)
        return list(self.session.execute(stmt.limit(limit)).scalars().all())

    def create(self, **data: Any) -> T:
        data.setdefault("id", uuid4().hex)
        entity = self.model_class(**data)
        self.session.add(entity)
        self.session.flush()
        return entity


class RunRepository(BaseRepository[RunModel]):
    def __init__(self, session: Session):
        super().__init__(session, RunModel)

    def ensure(self, run_id: str, protocol_hash: str, config: Optional[dict] = None) -> RunModel:
        run = self.get(run_id)
        if run is None:
            run = self.create(id=run_id, protocol_hash=protocol_hash, config=config or {})
        return run


class SnapshotRepository(BaseRepository[IslandSnapshotModel]):
    """Save and restore ProgramDatabase snapshots."""

    def __init__(self, session: Session):
        super().__init__(session, IslandSnapshotModel)

    def save(self, run_id: str, db: ProgramDatabase) -> IslandSnapshotModel:
        RunRepository(self.session).ensure(run_id, db.config.protocol_hash)
        best = db.global_best
        return self.create(
            run_id=run_id,
            generated=db.generated,
            accepted=db.accepted,
            best_score=None if best is None else best.score,
            best_hash=None if best is None else best.content_hash,
            state=db.state_json(),
        )

    def latest(self, run_id: str) -> Optional[IslandSnapshotModel]:
        stmt = (
            select(IslandSnapshotModel)
            .filter(IslandSnapshotModel.run_id == run_id)
            .order_by(IslandSnapshotModel.generated.desc(), IslandSnapshotModel.created_at.desc())
            .limit(1)
        )
        return self.session.execute(stmt).scalar_one_or_none()

    def latest_state(self, run_id: str, protocol_hash: str = "") -> Optional[dict[str, Any]]:
        """State of the newest snapshot of a run; None if absent or taken under another protocol."""
        snapshot = self.latest(run_id)
        if snapshot is None:
            return None
        if protocol_hash and snapshot.run.protocol_hash and snapshot.run.protocol_hash != protocol_hash:
            logger.warning(
                "Ignoring snapshot from another evaluation protocol",
                extra={"extra_data": {"run_id": run_id, "generated": snapshot.generated}},
            )
            return None
        return json.loads(snapshot.state)

    def restore(self, run_id: str, config: DatabaseConfig) -> Optional[ProgramDatabase]:
        """Database rebuilt from the newest snapshot of a run, if any."""
        state = self.latest_state(run_id, config.protocol_hash)
        return None if state is None else ProgramDatabase.from_state(state, config)
