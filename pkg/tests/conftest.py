"""
Test Configuration and Fixtures

Provides codes, link batches, cheap evaluation protocols and program
databases shared by the AHD tests.
"""

import pytest
import numpy as np

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from ahd.config import RunConfig
from ahd.db.base import Base
from ahd.evolution import DatabaseConfig, ProgramDatabase, ResetPolicy
from ahd.kernels import KernelParams
from ahd.kernelscript import parse, seed_program
from ahd.phy import Context, default_graph
from ahd.scoring import EvalProtocol, ScoreRecord, protocol_hash


# =============================================================================
# Database Fixtures
# =============================================================================


@pytest.fixture(scope="function")
def engine():
    """Create a fresh in-memory database for each test."""
    engine = create_engine("sqlite:///:memory:")
    Base.metadata.create_all(engine)
    yield engine
    Base.metadata.drop_all(engine)


@pytest.fixture(scope="function")
def session(engine):
    """Create a new database session for each test."""
    SessionLocal = sessionmaker(bind=engine)
    session = SessionLocal()
    yield session
    session.close()


# =============================================================================
# Code and Link Fixtures
# =============================================================================


@pytest.fixture
def graph8():
    """Desk code with lift size 8 (N=64, K=32)."""
    return default_graph(8)


@pytest.fixture
def graph16():
    """Default desk code (N=128, K=64)."""
    return default_graph(16)


@pytest.fixture
def clean_context() -> Context:
    """BPSK rate 1/2 on 2 PRBs at an SNR where every TB decodes."""
    return Context(n_prb=2, mcs_index=1, snr_db=40.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# =============================================================================
# Scoring Fixtures
# =============================================================================


@pytest.fixture
def cheap_protocol() -> EvalProtocol:
    """Small protocol near the decoding boundary: few TBs, short iteration budget."""
    return EvalProtocol(
        contexts=(Context(n_prb=2, mcs_index=1, snr_db=1.0),),
        n_tbs=4,
        tb_batch_seed=7,
        max_iters=10,
    )


def make_record(score_penalty: float = 0.0, protocol: str = "", catastrophic: bool = False) -> ScoreRecord:
    """A hand-made record whose score is -(iterations) for quick database tests."""
    if catastrophic:
        return ScoreRecord.catastrophe("SandboxFault: numeric", protocol_hash=protocol)
    return ScoreRecord.build(
        undecoded=0,
        mean_ber=0.0,
        total_iterations=int(score_penalty),
        context_ids=("prb2-mcs1-snr1",),
        tb_batch_seed=0,
        protocol_hash=protocol,
    )


def numbered_program(value: float):
    """Distinct one-statement programs."""
    return parse(f"x = L * {value}\nreturn x")


@pytest.fixture
def seed_kernel_program():
    return seed_program("offset-min-sum", KernelParams(beta=0.5))


@pytest.fixture
def database() -> ProgramDatabase:
    """Four islands seeded with one program, automatic resets disabled."""
    db = ProgramDatabase(DatabaseConfig(n_islands=4, reset=ResetPolicy(every=0), seed=3))
    db.seed(numbered_program(1), make_record(100))
    return db


# =============================================================================
# Run Config Fixtures
# =============================================================================


@pytest.fixture
def run_config() -> RunConfig:
    """Mock-mutator run on a cheap protocol with a degraded seed kernel."""
    return RunConfig(
        seed=11,
        budget=12,
        n_islands=2,
        protocol={
            "contexts": [{"n_prb": 2, "mcs_index": 1, "snr_db": 1.0}],
            "n_tbs": 3,
            "tb_batch_seed": 5,
            "max_iters": 8,
        },
        mutator={"mode": "mock", "examples_per_prompt": 2},
        seed_kernel={"kernel": "offset-min-sum", "beta": 3.0},
    )


@pytest.fixture
def run_protocol_hash(run_config) -> str:
    return protocol_hash(run_config.eval_protocol())
