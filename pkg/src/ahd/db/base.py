"""
Database Base Configuration

SQLAlchemy base, engine, and session setup for the island snapshot store.
"""

import os
from contextlib import contextmanager
from typing import Generator, Optional

from sqlalchemy import Engine, StaticPool, create_engine
from sqlalchemy.orm import DeclarativeBase, Session, sessionmaker


class Base(DeclarativeBase):
    """SQLAlchemy declarative base for all models."""

    pass


def database_url() -> str:
    """Snapshot store URL from AHD_DATABASE_URL, SQLite by default."""
    return os.getenv("AHD_DATABASE_URL", "sqlite:///./ahd.db")


def make_engine(url: Optional[str] = None) -> Engine:
    url = url or database_url()
    kwargs: dict = {"echo": os.getenv("AHD_DB_ECHO", "false").lower() == "true"}
    if url.startswith("sqlite"):
        # FastAPI handlers run in a thread pool
        kwargs["connect_args"] = {"check_same_thread": False}
        if ":memory:" in url:
            kwargs["poolclass"] = StaticPool
    return create_engine(url, **kwargs)


def make_session_factory(engine: Engine) -> sessionmaker[Session]:
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)


@contextmanager
def session_scope(factory: sessionmaker[Session]) -> Generator[Session, None, None]:
    """
    Context manager for database sessions.

    Usage:
        with session_scope(factory) as session:
            SnapshotRepository(session).latest(run_id)
    """
    session = factory()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def init_db(engine: Engine) -> None:
    """Create missing tables."""
    Base.metadata.create_all(bind=engine)

