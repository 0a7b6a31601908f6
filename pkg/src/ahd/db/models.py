"""
SQLAlchemy ORM Models

Run records and island database snapshots.
"""

from datetime import datetime
from typing import Optional

from sqlalchemy import JSON, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .base import Base


class RunModel(Base):
    """One evolution run."""

    __tablename__ = "runs"

    id: Mapped[str] = mapped_column(String(64), primary_key=True)
    protocol_hash: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    config: Mapped[dict] = mapped_column(JSON, default=dict)
    created_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.now)

    snapshots: Mapped[list["IslandSnapshotModel"]] = relationship(
        back_populates="run", cascade="all, delete-orphan"
    )


class IslandSnapshotModel(Base):
    """Full island database state after `generated` candidates."""

    __tablename__ = "island_snapshots"

    id: Mapped[str] = mapped_column(String(36), primary_key=True)
    run_id: Mapped[str] = mapped_column(ForeignKey("runs.id"), nullable=False, index=True)
    generated: Mapped[int] = mapped_column(Integer, nullable=False)
    accepted: Mapped[int] = mapped_column(Integer, nullable=False)
    best_score: Mapped[Optional[float]] = mapped_column(Float)
    best_hash: Mapped[Optional[str]] = mapped_column(String(64))
    state: Mapped[str] = mapped_column(Text, nullable=False)
    created_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.now)

    run: Mapped[RunModel] = relationship(back_populates="snapshots")
