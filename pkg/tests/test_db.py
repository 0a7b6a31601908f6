"""
Snapshot Store Tests

Tests for the SQLAlchemy run and island snapshot repositories.
"""

from ahd.db import RunRepository, SnapshotRepository, make_engine, make_session_factory, init_db, session_scope
from ahd.evolution import DatabaseConfig, ProgramDatabase
from tests.conftest import make_record, numbered_program


class TestRunRepository:
    """Tests for run records."""

    def test_ensure_creates_once(self, session):
        repo = RunRepository(session)
        first = repo.ensure("evolve-abc", "f" * 64, {"seed": 1})
        second = repo.ensure("evolve-abc", "0" * 64)
        assert first is second
        assert second.protocol_hash == "f" * 64
        assert len(repo.list()) == 1


class TestSnapshotRepository:
    """Tests for saving and restoring database snapshots."""

    def test_latest_none(self, session):
        assert SnapshotRepository(session).latest("missing") is None
        assert SnapshotRepository(session).restore("missing", DatabaseConfig()) is None
        assert SnapshotRepository(session).latest_state("missing") is None

    def test_save_and_restore(self, session, database):
        database.register(1, numbered_program(2), make_record(20))
        repo = SnapshotRepository(session)
        snapshot = repo.save("run-1", database)
        assert snapshot.generated == 1
        assert snapshot.best_score == -20
        assert snapshot.best_hash == numbered_program(2).content_hash

        restored = repo.restore("run-1", database.config)
        assert restored.state_json() == database.state_json()

    def test_latest_is_newest(self, session, database):
        repo = SnapshotRepository(session)
        repo.save("run-1", database)
        database.register(0, numbered_program(3), make_record(10))
        repo.save("run-1", database)
        assert repo.latest("run-1").generated == 1
        assert len(repo.list(run_id="run-1")) == 2

    def test_other_protocol_ignored(self, session):
        """Test that a snapshot taken under another protocol is not restored."""
        db = ProgramDatabase(DatabaseConfig(n_islands=2, protocol_hash="a" * 64))
        repo = SnapshotRepository(session)
        repo.save("run-1", db)
        assert repo.latest_state("run-1", "a" * 64)["counters"]["generated"] == 0
        assert repo.latest_state("run-1", "b" * 64) is None
        assert repo.restore("run-1", DatabaseConfig(n_islands=2, protocol_hash="b" * 64)) is None

    def test_runs_are_separate(self, session, database):
        repo = SnapshotRepository(session)
        repo.save("run-a", database)
        assert repo.latest("run-b") is None

    def test_empty_database(self, session):
        db = ProgramDatabase(DatabaseConfig(n_islands=2))
        snapshot = SnapshotRepository(session).save("run-empty", db)
        assert snapshot.best_score is None
        assert snapshot.best_hash is None


class TestSessionScope:
    """Tests for engine and session helpers."""

    def test_commit_on_success(self, tmp_path, database):
        engine = make_engine(f"sqlite:///{tmp_path / 'snap.db'}")
        init_db(engine)
        factory = make_session_factory(engine)
        with session_scope(factory) as session:
            SnapshotRepository(session).save("run-1", database)
        with session_scope(factory) as session:
            assert SnapshotRepository(session).latest("run-1") is not None

    def test_rollback_on_error(self, tmp_path, database):
        engine = make_engine(f"sqlite:///{tmp_path / 'snap.db'}")
        init_db(engine)
        factory = make_session_factory(engine)
        try:
            with session_scope(factory) as session:
                SnapshotRepository(session).save("run-1", database)
                raise RuntimeError("boom")
        except RuntimeError:
            pass
        with session_scope(factory) as session:
            assert SnapshotRepository(session).latest("run-1") is None
