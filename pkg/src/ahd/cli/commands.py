"""
CLI Commands

One function per subcommand. Each takes plain arguments, writes its
outputs (CSV files plus the run manifest) under `out_dir` and returns
what it computed so callers and tests can inspect it.
"""

import asyncio
import hashlib
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from ahd.config import RunConfig
from ahd.evolution import ProgramDatabase, TraceRow
from ahd.kernels import get_kernel
from ahd.phy import Context, load_context_grid
from ahd.phy.service import DATA_DIR
from ahd.scoring import (
    ComparisonRow,
    EvalProtocol,
    GeneralizationRow,
    GridPoint,
    NoIntermediateZone,
    compare_kernels,
    generalization_check,
    pick_boundary_context,
    sweep_grid,
)
from ahd.services import prepare_database, run_distributed, run_local, save_snapshot
from ahd.tanner import build_code, default_spec_path, expand_dense, gf2_rank, load_spec, serialize_spec

from .manifest import MANIFEST_NAME, REPORT_MANIFEST_NAME, RunManifest, derive_run_id

logger = logging.getLogger(__name__)

DEFAULT_GRID = DATA_DIR / "contexts" / "grid_desk.csv"

TRACE_COLUMNS = ("candidate_index", "score", "best_so_far")
HISTORY_COLUMNS = ("candidate_index", "island_id", "outcome", "score", "best_so_far")


def _num(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


# =============================================================================
# codegen
# =============================================================================


def cmd_codegen(
    lift_size: int = 16,
    spec_path: Optional[Union[str, Path]] = None,
    write: Optional[Union[str, Path]] = None,
) -> dict[str, Any]:
    """Validate a code spec, optionally write it in canonical form, and describe it."""
    spec = load_spec(spec_path or default_spec_path(lift_size))
    graph = build_code(spec)
    info = {
        "n": graph.n,
        "k": graph.k,
        "edges": graph.n_edges,
        "rank": gf2_rank(expand_dense(spec)),
        "lift_size": spec.lift_size,
    }
    if write:
        Path(write).parent.mkdir(parents=True, exist_ok=True)
        Path(write).write_text(serialize_spec(spec), encoding="utf-8")
        info["written"] = str(write)
    return info


# =============================================================================
# sweep
# =============================================================================


def cmd_sweep(
    grid: Union[str, Path],
    kernel_name: str,
    n_tbs: int,
    seed: int,
    out_dir: Union[str, Path],
    *,
    lift_size: int = 16,
    max_iters: int = 50,
) -> tuple[Path, list[GridPoint], Optional[Context]]:
    """Success fraction, iterations and BER over a context grid."""
    kernel = get_kernel(kernel_name)
    contexts = load_context_grid(grid)
    manifest = RunManifest.start(
        "sweep",
        {"grid": str(grid), "kernel": kernel_name, "n_tbs": n_tbs, "lift_size": lift_size,
         "max_iters": max_iters},
        {"seed": seed},
        Path(out_dir),
        lift_size=lift_size,
    )
    points = sweep_grid(contexts, kernel, n_tbs, seed, lift_size=lift_size, max_iters=max_iters)
    path = manifest.write_csv(
        f"sweep_{kernel_name.replace(':', '_').replace('/', '_')}.csv",
        ("n_prb", "mcs_index", "snr_db", "success_fraction", "mean_iterations", "mean_ber"),
        (
            (p.context.n_prb, p.context.mcs_index, f"{p.context.snr_db:g}",
             f"{p.success_fraction:.6f}", f"{p.mean_iterations:.6f}", f"{p.mean_ber:.6e}")
            for p in points
        ),
    )
    boundary: Optional[Context] = None
    try:
        boundary = pick_boundary_context(points)
        logger.info("Boundary context", extra={"extra_data": {"context": boundary.context_id}})
    except NoIntermediateZone:
        logger.info("Sweep has no intermediate zone")
    manifest.finish()
    return path, points, boundary


# =============================================================================
# bench
# =============================================================================


def parse_context(text: str) -> Context:
    """`n_prb,mcs_index,snr_db`."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"Context must be n_prb,mcs_index,snr_db; got {text!r}")
    return Context(int(parts[0]), int(parts[1]), float(parts[2]))


def format_table(rows: Sequence[ComparisonRow]) -> str:
    header = f"{'kernel':<20} {'context':<22} {'decoded':>16} {'ber':>22} {'iterations':>16}"
    lines = [header, "-" * len(header)]
    for r in rows:
        if r.catastrophic:
            lines.append(f"{r.kernel:<20} {r.context_id:<22} catastrophic: {r.fault}")
            continue
        lines.append(
            f"{r.kernel:<20} {r.context_id:<22} "
            f"{r.decoded_mean:>7.2f} ± {r.decoded_std:<6.2f} "
            f"{r.ber_mean:>10.3e} ± {r.ber_std:<9.2e} "
            f"{r.iterations_mean:>7.2f} ± {r.iterations_std:<6.2f}"
        )
    return "\n".join(lines)


def cmd_bench(
    kernel_names: Sequence[str],
    context: Context,
    trials: int,
    n_tbs: int,
    seed: int,
    out_dir: Union[str, Path],
    *,
    grid: Optional[Union[str, Path]] = None,
    reference: str = "boxplus",
    lift_size: int = 16,
) -> tuple[Path, list[ComparisonRow], list[tuple[str, GeneralizationRow]]]:
    """Mean ± std of decoded count, BER and iterations per kernel over trials."""
    if not kernel_names:
        raise ValueError("bench needs at least one kernel")
    kernels = {name: get_kernel(name) for name in kernel_names}
    protocol = EvalProtocol(contexts=(context,), n_tbs=n_tbs, tb_batch_seed=seed, lift_size=lift_size)
    manifest = RunManifest.start(
        "bench",
        {"kernels": list(kernel_names), "context": context.to_dict(), "trials": trials,
         "n_tbs": n_tbs, "grid": str(grid) if grid else None, "lift_size": lift_size},
        {"seed": seed},
        Path(out_dir),
        lift_size=lift_size,
    )
    rows = compare_kernels(kernels, protocol, trials)
    path = manifest.write_csv(
        "bench.csv",
        ("kernel", "context_id", "trials", "decoded_mean", "decoded_std", "ber_mean", "ber_std",
         "iterations_mean", "iterations_std", "catastrophic"),
        (
            (r.kernel, r.context_id, r.trials, f"{r.decoded_mean:.6f}", f"{r.decoded_std:.6f}",
             f"{r.ber_mean:.6e}", f"{r.ber_std:.6e}", f"{r.iterations_mean:.6f}",
             f"{r.iterations_std:.6f}", int(r.catastrophic))
            for r in rows
        ),
    )

    general: list[tuple[str, GeneralizationRow]] = []
    if grid:
        contexts = load_context_grid(grid)
        ref_kernel = get_kernel(reference)
        for name, kernel in kernels.items():
            for row in generalization_check(kernel, ref_kernel, contexts, n_tbs, seed, lift_size=lift_size):
                general.append((name, row))
        manifest.write_csv(
            "generalization.csv",
            ("kernel", "n_prb", "mcs_index", "snr_db", "success_fraction",
             "reference_success_fraction", "mean_iterations", "reference_mean_iterations", "holds"),
            (
                (name, g.context.n_prb, g.context.mcs_index, f"{g.context.snr_db:g}",
                 f"{g.success_fraction:.6f}", f"{g.reference_success_fraction:.6f}",
                 f"{g.mean_iterations:.6f}", f"{g.reference_mean_iterations:.6f}", int(g.holds))
                for name, g in general
            ),
        )
    manifest.finish()
    return path, rows, general


# =============================================================================
# evolve
# =============================================================================


@dataclass
class EvolveOutputs:
    manifest: RunManifest
    stats: dict[str, Any]
    best_source: Optional[str]
    interrupted: bool = False


def _write_trace(manifest: RunManifest, history: Sequence[TraceRow]) -> None:
    manifest.write_csv(
        "score_trace.csv",
        TRACE_COLUMNS,
        ((row.candidate_index + 1, _num(row.score), _num(row.best_so_far)) for row in history),
    )
    manifest.write_csv(
        "island_history.csv",
        HISTORY_COLUMNS,
        (
            (row.candidate_index + 1, "" if row.island_id is None else row.island_id,
             row.outcome.value, _num(row.score), _num(row.best_so_far))
            for row in history
        ),
    )


def snapshot_url(out_dir: Path) -> str:
    return os.getenv("AHD_DATABASE_URL") or f"sqlite:///{(out_dir / 'snapshots.db').resolve()}"


def cmd_evolve(
    config: RunConfig,
    out_dir: Union[str, Path],
    *,
    mode: str = "local",
    budget: Optional[int] = None,
) -> EvolveOutputs:
    """
    Run evolution until `budget` candidates. Local runs keep their event
    log in out_dir/events.jsonl; rerunning with the same out_dir resumes
    from it.
    """
    out_dir = Path(out_dir)
    budget = budget or config.budget
    snapshot = config.snapshot()
    manifest = RunManifest.start(
        "evolve",
        snapshot,
        {"seed": config.seed, "tb_batch_seed": config.protocol.tb_batch_seed},
        out_dir,
        protocol_hash=config.protocol_hash(),
        lift_size=config.protocol.lift_size,
        run_id=config.run_id,
    )

    if mode == "distributed":
        stats = asyncio.run(run_distributed(config, budget=budget))
        best = stats.get("global_best") or {}
        manifest.write_text("stats.json", json.dumps(stats, indent=2, sort_keys=True))
        if best:
            manifest.write_text("best_program.ks", best["source"] + "\n")
        manifest.finish()
        return EvolveOutputs(manifest, stats, best.get("source"))
    if mode != "local":
        raise ValueError(f"Unknown mode {mode!r}")

    out_dir.mkdir(parents=True, exist_ok=True)
    db = prepare_database(
        config, out_dir / "events.jsonl", snapshot_url=snapshot_url(out_dir), run_id=manifest.run_id
    )
    interrupted = False
    try:
        asyncio.run(run_local(config, budget=budget, database=db))
    except KeyboardInterrupt:
        interrupted = True
        logger.warning("Run interrupted; writing outputs of the candidates so far")

    stats = db.stats()
    best = db.global_best
    manifest.outputs.append("events.jsonl")
    if best is not None:
        manifest.write_text("best_program.ks", best.program.source + "\n")
    _write_trace(manifest, db.history)
    save_snapshot(snapshot_url(out_dir), manifest.run_id, db)
    manifest.finish()
    return EvolveOutputs(manifest, stats, best.program.source if best else None, interrupted)


# =============================================================================
# report
# =============================================================================


@dataclass
class ReportSummary:
    generated: int
    accepted: int
    catastrophic: int
    skipped: int
    resets: int
    best_score: Optional[float]
    best_source: Optional[str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "generated": self.generated,
            "accepted": self.accepted,
            "catastrophic": self.catastrophic,
            "skipped": self.skipped,
            "resets": self.resets,
            "best_score": self.best_score,
            "best_source": self.best_source,
        }


def report_config(log_path: Path, config: Optional[RunConfig]) -> RunConfig:
    """Explicit config, else the evolve manifest written next to the log, else defaults."""
    if config is not None:
        return config
    manifest_path = log_path.parent / MANIFEST_NAME
    if manifest_path.exists():
        manifest = RunManifest.load(manifest_path)
        if manifest.command == "evolve":
            return RunConfig.model_validate(manifest.config)
    return RunConfig()


def cmd_report(
    log_path: Union[str, Path],
    out_dir: Union[str, Path],
    config: Optional[RunConfig] = None,
) -> ReportSummary:
    """Rebuild a run from its event log and write its totals, best program and traces."""
    log_path = Path(log_path)
    if not log_path.exists():
        raise FileNotFoundError(f"No event log at {log_path}")
    config = report_config(log_path, config)

    db = ProgramDatabase(config.database_config())
    db.replay(log_path)

    digest = hashlib.sha256(log_path.read_bytes()).hexdigest()
    manifest = RunManifest.start(
        "report",
        {"event_log": str(log_path), "log_sha256": digest},
        {"seed": config.seed},
        Path(out_dir),
        protocol_hash=config.protocol_hash(),
        lift_size=config.protocol.lift_size,
        run_id=derive_run_id("report", {"log_sha256": digest}, {"seed": config.seed}),
    )
    best = db.global_best
    summary = ReportSummary(
        generated=db.generated,
        accepted=db.accepted,
        catastrophic=db.catastrophic,
        skipped=db.skipped,
        resets=db.resets,
        best_score=None if best is None else best.score,
        best_source=None if best is None else best.program.source,
    )
    if db.generated == 0:
        logger.info("Event log holds no candidates yet")
    _write_trace(manifest, db.history)
    if best is not None:
        manifest.write_text("best_program.ks", best.program.source + "\n")
    manifest.write_text("summary.json", json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    manifest.finish(REPORT_MANIFEST_NAME)
    return summary
