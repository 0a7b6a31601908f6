"""
CLI Tests

Tests for the `ahd` command line: exit codes, output files and the
run manifest.
"""

import csv
import json

import pytest

from ahd.cli.main import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from ahd.cli.manifest import RunManifest, derive_run_id


@pytest.fixture
def tiny_grid(tmp_path):
    path = tmp_path / "grid.csv"
    path.write_text("n_prb,mcs_index,snr_db\n2,1,-10\n2,1,40\n", encoding="utf-8")
    return path


@pytest.fixture
def evolve_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(
        json.dumps({
            "seed": 3,
            "budget": 4,
            "n_islands": 2,
            "protocol": {
                "contexts": [{"n_prb": 2, "mcs_index": 1, "snr_db": 1.0}],
                "n_tbs": 3,
                "tb_batch_seed": 5,
                "max_iters": 8,
            },
            "mutator": {"mode": "mock", "examples_per_prompt": 2},
        }),
        encoding="utf-8",
    )
    return path


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


# =============================================================================
# Usage Tests
# =============================================================================


class TestUsage:
    """Tests for argument handling and exit codes."""

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            main(["bogus"])
        assert info.value.code == EXIT_USAGE

    def test_missing_command(self):
        with pytest.raises(SystemExit) as info:
            main([])
        assert info.value.code == EXIT_USAGE

    def test_bad_context(self, tmp_path):
        assert main(["--out-dir", str(tmp_path), "bench", "--context", "2,1"]) == EXIT_USAGE

    def test_unknown_kernel(self, tmp_path, tiny_grid):
        code = main(["--out-dir", str(tmp_path), "sweep", "--grid", str(tiny_grid), "--kernel", "nope"])
        assert code == EXIT_USAGE

    def test_bad_config(self, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text("{not json", encoding="utf-8")
        code = main(["--config", str(config), "--out-dir", str(tmp_path), "evolve"])
        assert code == EXIT_USAGE


# =============================================================================
# codegen
# =============================================================================


class TestCodegen:
    """Tests for `ahd codegen`."""

    def test_bundled_code(self, capsys):
        assert main(["codegen"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "N=128 K=64" in out
        assert "Z=16" in out

    def test_write_canonical(self, tmp_path):
        target = tmp_path / "spec.txt"
        assert main(["codegen", "--lift", "8", "--write", str(target)]) == EXIT_OK
        assert main(["codegen", "--spec", str(target)]) == EXIT_OK

    def test_invalid_spec(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("garbage\n", encoding="utf-8")
        assert main(["codegen", "--spec", str(bad)]) == EXIT_RUNTIME


# =============================================================================
# sweep
# =============================================================================


class TestSweep:
    """Tests for `ahd sweep`."""

    def test_writes_csv_with_header(self, tmp_path, tiny_grid, capsys):
        args = ["--seed", "2", "--out-dir", str(tmp_path), "sweep", "--grid", str(tiny_grid),
                "--kernel", "min-sum", "--tbs", "2", "--max-iters", "10"]
        assert main(args) == EXIT_OK
        assert "2 contexts" in capsys.readouterr().out

        header, rows = read_csv(tmp_path / "sweep_min-sum.csv")
        assert header.startswith("# run_id=sweep-")
        assert "seed=2" in header
        assert [r["snr_db"] for r in rows] == ["-10", "40"]
        assert float(rows[0]["success_fraction"]) == 0.0
        assert float(rows[1]["success_fraction"]) == 1.0

        manifest = RunManifest.load(tmp_path / "manifest.json")
        assert header == manifest.header()
        assert manifest.finished_at is not None

    def test_run_id_deterministic(self, tmp_path, tiny_grid):
        args = ["sweep", "--grid", str(tiny_grid), "--kernel", "min-sum", "--tbs", "1", "--max-iters", "5"]
        main(["--out-dir", str(tmp_path / "a"), *args])
        main(["--out-dir", str(tmp_path / "b"), *args])
        first = (tmp_path / "a" / "sweep_min-sum.csv").read_text(encoding="utf-8")
        second = (tmp_path / "b" / "sweep_min-sum.csv").read_text(encoding="utf-8")
        assert first == second

    def test_derive_run_id(self):
        a = derive_run_id("sweep", {"k": 1}, {"seed": 0})
        assert a == derive_run_id("sweep", {"k": 1}, {"seed": 0})
        assert a != derive_run_id("sweep", {"k": 1}, {"seed": 1})
        assert a.startswith("sweep-") and len(a) == len("sweep-") + 12


# =============================================================================
# evolve / report
# =============================================================================


class TestEvolveAndReport:
    """Tests for `ahd evolve` followed by `ahd report`."""

    def test_local_run_then_report(self, tmp_path, evolve_config, capsys):
        run_dir = tmp_path / "run"
        assert main(["--config", str(evolve_config), "--out-dir", str(run_dir), "evolve"]) == EXIT_OK
        assert "generated=4" in capsys.readouterr().out
        for name in ("events.jsonl", "best_program.ks", "score_trace.csv", "island_history.csv",
                     "manifest.json", "snapshots.db"):
            assert (run_dir / name).exists(), name

        header, trace = read_csv(run_dir / "score_trace.csv")
        assert header.startswith("# run_id=")
        assert [r["candidate_index"] for r in trace] == ["1", "2", "3", "4"]

        report_dir = tmp_path / "report"
        code = main(["--out-dir", str(report_dir), "report", "--log", str(run_dir / "events.jsonl")])
        assert code == EXIT_OK
        assert "generated=4" in capsys.readouterr().out

        summary = json.loads((report_dir / "summary.json").read_text(encoding="utf-8"))
        assert summary["generated"] == 4
        assert summary["accepted"] + summary["catastrophic"] + summary["skipped"] == 4
        assert (report_dir / "best_program.ks").read_text(encoding="utf-8") == \
            (run_dir / "best_program.ks").read_text(encoding="utf-8")

    def test_report_in_run_dir_is_idempotent(self, tmp_path, evolve_config):
        """Test that reporting twice into the run directory keeps the evolve manifest."""
        run_dir = tmp_path / "run"
        assert main(["--config", str(evolve_config), "--out-dir", str(run_dir), "evolve"]) == EXIT_OK
        assert main(["--out-dir", str(run_dir), "report"]) == EXIT_OK
        first = (run_dir / "summary.json").read_text(encoding="utf-8")
        assert main(["--out-dir", str(run_dir), "report"]) == EXIT_OK
        assert (run_dir / "summary.json").read_text(encoding="utf-8") == first
        assert RunManifest.load(run_dir / "manifest.json").command == "evolve"
        assert RunManifest.load(run_dir / "report_manifest.json").command == "report"

    def test_rerun_resumes(self, tmp_path, evolve_config):
        run_dir = tmp_path / "run"
        main(["--config", str(evolve_config), "--out-dir", str(run_dir), "evolve", "--budget", "2"])
        main(["--config", str(evolve_config), "--out-dir", str(run_dir), "evolve"])
        _, trace = read_csv(run_dir / "score_trace.csv")
        assert len(trace) == 4

    def test_report_missing_log(self, tmp_path):
        assert main(["--out-dir", str(tmp_path), "report"]) == EXIT_RUNTIME

    def test_report_corrupt_log(self, tmp_path):
        log = tmp_path / "events.jsonl"
        log.write_text("this is not json\n", encoding="utf-8")
        assert main(["--out-dir", str(tmp_path), "report"]) == EXIT_RUNTIME


# =============================================================================
# Evolution Acceptance Run
# =============================================================================


@pytest.fixture
def degraded_seed_config(tmp_path):
    """Mock run seeded with offset min-sum at beta 3.0."""
    path = tmp_path / "degraded.json"
    path.write_text(
        json.dumps({
            "seed": 7,
            "budget": 500,
            "n_islands": 4,
            "protocol": {
                "contexts": [{"n_prb": 2, "mcs_index": 1, "snr_db": 1.0}],
                "n_tbs": 10,
                "tb_batch_seed": 0,
                "max_iters": 20,
            },
            "mutator": {"mode": "mock", "examples_per_prompt": 2},
            "seed_kernel": {"kernel": "offset-min-sum", "beta": 3.0},
        }),
        encoding="utf-8",
    )
    return path


@pytest.mark.slow
class TestEvolutionProgress:
    """500-candidate mock runs from a degraded seed kernel."""

    def test_improves_reproduces_and_restarts(self, tmp_path, degraded_seed_config):
        config = ["--config", str(degraded_seed_config)]
        for name in ("a", "b"):
            assert main([*config, "--out-dir", str(tmp_path / name), "evolve"]) == EXIT_OK
        restarted = tmp_path / "restarted"
        assert main([*config, "--out-dir", str(restarted), "evolve", "--budget", "250"]) == EXIT_OK
        assert main([*config, "--out-dir", str(restarted), "evolve"]) == EXIT_OK

        trace = (tmp_path / "a" / "score_trace.csv").read_bytes()
        assert (tmp_path / "b" / "score_trace.csv").read_bytes() == trace
        assert (restarted / "score_trace.csv").read_bytes() == trace
        assert (restarted / "best_program.ks").read_bytes() == (tmp_path / "a" / "best_program.ks").read_bytes()

        _, rows = read_csv(tmp_path / "a" / "score_trace.csv")
        assert len(rows) == 500
        assert float(rows[-1]["best_so_far"]) > float(rows[0]["best_so_far"])
