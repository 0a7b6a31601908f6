"""
Scoring Tests

Tests for the hierarchical score, candidate evaluation under a fixed
protocol, context sweeps, boundary-context selection and kernel
comparisons.
"""

from dataclasses import replace
from itertools import groupby

import numpy as np
import pytest

from ahd.decoder import KernelFault
from ahd.kernels import NativeKernel, get_kernel
from ahd.kernelscript import seed_source
from ahd.phy import Context, load_context_grid
from ahd.phy.service import DATA_DIR
from ahd.scoring import (
    MAX_PROTOCOL_TBS,
    ContextSimulationError,
    EvalProtocol,
    GridPoint,
    NoIntermediateZone,
    ScoreRecord,
    compare_kernels,
    compute_score,
    generalization_check,
    link_frames,
    pick_boundary_context,
    protocol_hash,
    score_candidate,
    sweep_grid,
    trial_seed,
)

HOPELESS = Context(n_prb=2, mcs_index=1, snr_db=-10.0)
CLEAN = Context(n_prb=2, mcs_index=1, snr_db=40.0)


def nan_kernel() -> NativeKernel:
    return NativeKernel("nan", lambda rows, params: np.full_like(rows, np.nan))


def point(n_prb: int, mcs_index: int, snr_db: float, success: float, iterations: float) -> GridPoint:
    return GridPoint(Context(n_prb, mcs_index, snr_db), 10, success, iterations, 0.01)


# =============================================================================
# Score Tests
# =============================================================================


class TestComputeScore:
    """Tests for the weighted penalty."""

    def test_weights(self):
        assert compute_score(0, 0, 0.0, 0) == 0.0
        assert compute_score(1, 0, 0.0, 0) == -1e9
        assert compute_score(0, 2, 0.5, 37) == -(2e7 + 5e5 + 37)

    def test_undecoded_tier_dominates(self):
        """Test that one more undecoded TB outweighs any BER and iteration difference."""
        undecoded = np.arange(31)[:, None, None]
        ber = (np.arange(101) / 100.0)[None, :, None]
        iterations = np.arange(1501)[None, None, :]
        scores = compute_score(0, undecoded, ber, iterations)

        worst = scores.min(axis=(1, 2))
        best = scores.max(axis=(1, 2))
        assert np.all(best[1:] < worst[:-1])

    def test_catastrophic_below_everything(self):
        undecoded = np.arange(31)[:, None, None]
        ber = (np.arange(101) / 100.0)[None, :, None]
        iterations = np.arange(1501)[None, None, :]
        healthy = compute_score(0, undecoded, ber, iterations)
        catastrophic = compute_score(1, undecoded, ber, iterations)
        assert catastrophic.max() < healthy.min()

    def test_ber_grid_outweighs_iterations(self):
        """Test that a 0.01 BER step outweighs 1500 iterations at equal undecoded count."""
        ber = (np.arange(101) / 100.0)[:, None]
        iterations = np.arange(1501)[None, :]
        scores = compute_score(0, 3, ber, iterations)
        assert np.all(scores.max(axis=1)[1:] < scores.min(axis=1)[:-1])


class TestScoreRecord:
    """Tests for building and serializing records."""

    def test_build_matches_breakdown(self):
        record = ScoreRecord.build(
            undecoded=1,
            mean_ber=0.125,
            total_iterations=240,
            context_ids=("prb2-mcs1-snr1",),
            tb_batch_seed=4,
        )
        assert record.score == -(1e7 + 125_000 + 240)
        assert record.recomputed_score() == record.score
        assert record.catastrophic == 0
        assert record.fault is None

    def test_catastrophe(self):
        record = ScoreRecord.catastrophe("SandboxFault: budget", tb_batch_seed=3)
        assert record.score == -1e9
        assert record.catastrophic == 1
        assert record.fault == "SandboxFault: budget"
        assert record.recomputed_score() == record.score

    def test_wire_form(self):
        record = ScoreRecord.build(
            undecoded=0, mean_ber=0.0, total_iterations=12, context_ids=("a", "b"), tb_batch_seed=1
        )
        data = record.to_dict()
        assert set(data["penalty_breakdown"]) == {"catastrophic", "undecoded", "mean_ber", "total_iterations"}
        assert data["context_ids"] == ["a", "b"]
        assert ScoreRecord.from_dict(data) == record


class TestEvalProtocol:
    """Tests for protocol validation and hashing."""

    def test_tb_cap(self):
        with pytest.raises(ValueError):
            EvalProtocol(contexts=(CLEAN, HOPELESS), n_tbs=MAX_PROTOCOL_TBS // 2 + 1)

    def test_needs_context(self):
        with pytest.raises(ValueError):
            EvalProtocol(contexts=())

    def test_hash_changes_with_batch_seed(self):
        digest = protocol_hash(EvalProtocol())
        assert digest == protocol_hash(EvalProtocol())
        assert digest != protocol_hash(EvalProtocol(tb_batch_seed=1))
        assert len(digest) == 64


# =============================================================================
# Candidate Evaluation Tests
# =============================================================================


class TestScoreCandidate:
    """Tests for score_candidate."""

    def test_native_kernel(self, cheap_protocol):
        record = score_candidate(get_kernel("min-sum"), cheap_protocol)
        assert record.catastrophic == 0
        assert record.score == record.recomputed_score()
        assert record.protocol_hash == protocol_hash(cheap_protocol)
        assert record.context_ids == ("prb2-mcs1-snr1",)
        assert record.tb_batch_seed == cheap_protocol.tb_batch_seed
        assert 0 <= record.undecoded <= cheap_protocol.n_tbs
        assert record.total_iterations <= cheap_protocol.n_tbs * cheap_protocol.max_iters

    def test_deterministic(self, cheap_protocol):
        kernel = get_kernel("offset-min-sum")
        assert score_candidate(kernel, cheap_protocol) == score_candidate(kernel, cheap_protocol)

    def test_program_source(self, cheap_protocol):
        record = score_candidate(seed_source("min-sum"), cheap_protocol)
        assert record.catastrophic == 0

    def test_clean_context_scores_iterations_only(self):
        protocol = EvalProtocol(contexts=(CLEAN,), n_tbs=4, tb_batch_seed=1, max_iters=10)
        record = score_candidate(get_kernel("min-sum"), protocol)
        assert record.undecoded == 0
        assert record.mean_ber == 0.0
        assert record.score == -record.total_iterations

    def test_hopeless_context_counts_every_tb(self):
        protocol = EvalProtocol(contexts=(HOPELESS,), n_tbs=4, tb_batch_seed=1, max_iters=10)
        record = score_candidate(get_kernel("min-sum"), protocol)
        assert record.undecoded == 4
        assert record.score <= -4e7

    @pytest.mark.parametrize(
        "source, fault",
        [
            ("x = (", "KernelSyntaxError"),
            ("r = mystery(L)\nreturn r", "ValidationError"),
        ],
    )
    def test_bad_source_is_catastrophic(self, cheap_protocol, source, fault):
        record = score_candidate(source, cheap_protocol)
        assert record.catastrophic == 1
        assert record.score == -1e9
        assert record.fault.startswith(fault)
        assert record.protocol_hash == protocol_hash(cheap_protocol)

    def test_non_finite_kernel_is_catastrophic(self, cheap_protocol):
        record = score_candidate(nan_kernel(), cheap_protocol)
        assert record.catastrophic == 1
        assert record.fault.startswith("KernelFault")


# =============================================================================
# Sweep and Boundary Tests
# =============================================================================


class TestSweepGrid:
    """Tests for context sweeps."""

    def test_extremes(self):
        points = sweep_grid([HOPELESS, CLEAN], get_kernel("min-sum"), 4, seed=2, max_iters=10)
        assert [p.context for p in points] == [HOPELESS, CLEAN]
        assert [p.success_fraction for p in points] == [0.0, 1.0]
        assert all(p.n_tbs == 4 for p in points)
        assert points[1].mean_ber == 0.0

    def test_invalid_context(self):
        bad = Context(n_prb=2, mcs_index=99, snr_db=0.0)
        with pytest.raises(ContextSimulationError) as info:
            sweep_grid([bad], get_kernel("min-sum"), 2, seed=0)
        assert info.value.context == bad

    def test_kernel_fault_names_context(self):
        with pytest.raises(ContextSimulationError) as info:
            sweep_grid([CLEAN], nan_kernel(), 2, seed=0)
        assert isinstance(info.value.cause, KernelFault)
        assert info.value.context == CLEAN

    def test_link_frames_cached(self):
        """Test that every candidate sees the same TB batch object."""
        assert link_frames(CLEAN, 2, 5) is link_frames(CLEAN, 2, 5)


class TestPickBoundaryContext:
    """Tests for boundary-context selection and its tie-breaks."""

    def test_most_iterations_in_band(self):
        grid = [
            point(2, 1, 1.0, 0.5, 6.0),
            point(2, 1, 4.0, 0.8, 9.0),
            point(2, 1, 7.0, 1.0, 20.0),
            point(2, 1, -2.0, 0.0, 25.0),
        ]
        assert pick_boundary_context(grid) == Context(2, 1, 4.0)

    def test_band_is_inclusive(self):
        assert pick_boundary_context([point(2, 1, 1.0, 0.3, 5.0)]) == Context(2, 1, 1.0)
        assert pick_boundary_context([point(2, 1, 1.0, 0.9, 5.0)]) == Context(2, 1, 1.0)

    def test_tie_lowest_snr(self):
        grid = [point(2, 1, 4.0, 0.5, 9.0), point(2, 1, 1.0, 0.6, 9.0)]
        assert pick_boundary_context(grid).snr_db == 1.0

    def test_tie_highest_mcs(self):
        grid = [point(2, 1, 1.0, 0.5, 9.0), point(2, 3, 1.0, 0.6, 9.0)]
        assert pick_boundary_context(grid).mcs_index == 3

    def test_tie_most_prbs(self):
        grid = [point(2, 3, 1.0, 0.5, 9.0), point(4, 3, 1.0, 0.6, 9.0)]
        assert pick_boundary_context(grid).n_prb == 4

    def test_custom_band(self):
        grid = [point(2, 1, 1.0, 0.2, 9.0), point(2, 1, 4.0, 0.5, 3.0)]
        assert pick_boundary_context(grid, band=(0.1, 0.25)) == Context(2, 1, 1.0)

    def test_no_intermediate_zone(self):
        with pytest.raises(NoIntermediateZone):
            pick_boundary_context([point(2, 1, -2.0, 0.0, 10.0), point(2, 1, 10.0, 1.0, 1.0)])


# =============================================================================
# Comparison Tests
# =============================================================================


class TestCompareKernels:
    """Tests for multi-trial kernel comparison."""

    def test_rows_per_kernel_and_context(self, cheap_protocol):
        rows = compare_kernels({"min-sum": get_kernel("min-sum")}, cheap_protocol, trials=2)
        assert len(rows) == 1
        row = rows[0]
        assert row.kernel == "min-sum"
        assert row.context_id == "prb2-mcs1-snr1"
        assert row.trials == 2
        assert 0.0 <= row.decoded_mean <= cheap_protocol.n_tbs
        assert not row.catastrophic

    def test_same_kernel_twice_gives_same_rows(self, cheap_protocol):
        kernels = {"a": get_kernel("min-sum"), "b": get_kernel("min-sum")}
        first, second = compare_kernels(kernels, cheap_protocol, trials=2)
        assert replace(second, kernel="a") == first

    def test_faulting_kernel_row(self, cheap_protocol):
        rows = compare_kernels({"bad": nan_kernel()}, cheap_protocol, trials=2)
        assert rows[0].catastrophic
        assert rows[0].fault.startswith("KernelFault")
        assert rows[0].decoded_mean == 0.0

    def test_needs_a_trial(self, cheap_protocol):
        with pytest.raises(ValueError):
            compare_kernels({"min-sum": get_kernel("min-sum")}, cheap_protocol, trials=0)

    def test_trial_seeds(self):
        seeds = [trial_seed(0, t) for t in range(20)]
        assert seeds == [trial_seed(0, t) for t in range(20)]
        assert len(set(seeds)) == 20
        assert trial_seed(1, 0) != trial_seed(0, 0)
        assert all(0 <= s < 2**32 for s in seeds)


class TestGeneralizationCheck:
    """Tests for re-running a kernel across contexts against a reference."""

    def test_holds_at_extremes(self):
        rows = generalization_check(
            get_kernel("min-sum"), get_kernel("boxplus"), [HOPELESS, CLEAN], 4, seed=3, max_iters=10
        )
        assert [r.context for r in rows] == [HOPELESS, CLEAN]
        assert [r.reference_success_fraction for r in rows] == [0.0, 1.0]
        assert all(r.holds for r in rows)

    def test_faulting_kernel_fails(self):
        rows = generalization_check(nan_kernel(), get_kernel("boxplus"), [CLEAN], 2, seed=3, max_iters=10)
        assert not rows[0].holds
        assert rows[0].success_fraction == 0.0
        assert rows[0].mean_iterations == 10.0


# =============================================================================
# Desk-Scale Acceptance Runs
# =============================================================================


@pytest.fixture(scope="module")
def desk_sweep() -> list[GridPoint]:
    """Boxplus over the 6 x 5 desk grid at 200 TBs per context."""
    contexts = load_context_grid(DATA_DIR / "contexts" / "grid_desk.csv")
    return sweep_grid(contexts, get_kernel("boxplus"), 200, seed=0)


@pytest.mark.slow
class TestDeskScale:
    """Zone structure and kernel ordering on the desk grid."""

    def test_zone_structure(self, desk_sweep):
        """Test success monotone in SNR per row with full, failed and boundary zones present."""
        assert len(desk_sweep) == 30
        rows = sorted(desk_sweep, key=lambda p: (p.context.n_prb, p.context.mcs_index, p.context.snr_db))
        for _, row in groupby(rows, key=lambda p: (p.context.n_prb, p.context.mcs_index)):
            success = [p.success_fraction for p in row]
            assert success == sorted(success)

        assert any(p.success_fraction == 1.0 for p in desk_sweep)
        assert any(p.success_fraction == 0.0 for p in desk_sweep)
        assert any(0.3 < p.success_fraction < 0.9 and p.mean_iterations >= 5 for p in desk_sweep)

    def test_kernel_ordering_at_boundary(self, desk_sweep):
        """Test boxplus >= min-sum and discovered within one pooled std of boxplus."""
        boundary = pick_boundary_context(desk_sweep)
        protocol = EvalProtocol(contexts=(boundary,), n_tbs=30, tb_batch_seed=0)
        kernels = {name: get_kernel(name) for name in ("boxplus", "min-sum", "discovered")}
        rows = {row.kernel: row for row in compare_kernels(kernels, protocol, trials=50)}

        assert rows["boxplus"].decoded_mean >= rows["min-sum"].decoded_mean
        pooled = np.sqrt((rows["boxplus"].decoded_std ** 2 + rows["discovered"].decoded_std ** 2) / 2)
        assert abs(rows["boxplus"].decoded_mean - rows["discovered"].decoded_mean) <= pooled
