"""
ahd command line

    ahd [--seed N] [--config run.json] [--out-dir DIR] <command> ...

Commands: codegen, sweep, bench, evolve, report. Exit codes are 0 on
success, 1 on a usage or configuration error and 2 on a runtime failure.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import NoReturn, Optional, Sequence

from ahd.api.logging_config import configure_logging
from ahd.config import RunConfig, load_run_config
from ahd.errors import AhdError, ConfigError
from ahd.evolution import CorruptLog
from ahd.kernels import UnknownKernel, kernel_names

from . import commands

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    value = os.getenv("AHD_SEED")
    return int(value) if value else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ahd", description="LDPC decoding chain and CNU kernel evolution")
    parser.add_argument("--seed", type=int, default=None, help="global seed (default: AHD_SEED or 0)")
    parser.add_argument("--config", type=Path, default=None, help="JSON run config")
    parser.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--log-level", default=None, help="overrides AHD_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    codegen = sub.add_parser("codegen", help="validate a code spec and print its dimensions")
    codegen.add_argument("--lift", type=int, default=16, help="lifting size of a bundled code")
    codegen.add_argument("--spec", type=Path, default=None, help="code spec file to validate")
    codegen.add_argument("--write", type=Path, default=None, help="write the canonical spec here")

    sweep = sub.add_parser("sweep", help="success/iteration heatmap over a context grid")
    sweep.add_argument("--grid", type=Path, default=commands.DEFAULT_GRID)
    sweep.add_argument("--kernel", default="boxplus")
    sweep.add_argument("--tbs", type=int, default=200, help="transport blocks per context")
    sweep.add_argument("--lift", type=int, default=16)
    sweep.add_argument("--max-iters", type=int, default=50)

    bench = sub.add_parser("bench", help="compare kernels over repeated trials")
    bench.add_argument("--kernels", default="boxplus,min-sum,discovered",
                       help=f"comma-separated; one of {', '.join(kernel_names())} or script:<file>")
    bench.add_argument("--context", default=None, help="n_prb,mcs_index,snr_db (default: run config)")
    bench.add_argument("--trials", type=int, default=10)
    bench.add_argument("--tbs", type=int, default=30)
    bench.add_argument("--grid", type=Path, default=None, help="also check generalization over a grid")
    bench.add_argument("--lift", type=int, default=16)

    evolve = sub.add_parser("evolve", help="run kernel evolution")
    evolve.add_argument("--mode", choices=("local", "distributed"), default="local")
    evolve.add_argument("--budget", type=int, default=None, help="candidates (default: run config)")

    report = sub.add_parser("report", help="summarize an evolution event log")
    report.add_argument("--log", type=Path, default=None, help="event log (default: <out-dir>/events.jsonl)")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {} if args.seed is None else {"seed": args.seed}
    return load_run_config(args.config, overrides)


def _seed(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _dispatch(args: argparse.Namespace) -> int:
    out_dir: Path = args.out_dir

    if args.command == "codegen":
        info = commands.cmd_codegen(args.lift, args.spec, args.write)
        print(f"N={info['n']} K={info['k']} edges={info['edges']} rank={info['rank']} Z={info['lift_size']}")
        return EXIT_OK

    if args.command == "sweep":
        path, points, boundary = commands.cmd_sweep(
            args.grid, args.kernel, args.tbs, _seed(args), out_dir,
            lift_size=args.lift, max_iters=args.max_iters,
        )
        print(f"{len(points)} contexts -> {path}")
        print(f"boundary context: {boundary.context_id if boundary else 'none'}")
        return EXIT_OK

    if args.command == "bench":
        names = [n.strip() for n in args.kernels.split(",") if n.strip()]
        if not names:
            raise UsageError("--kernels needs at least one kernel")
        if args.context:
            try:
                context = commands.parse_context(args.context)
            except ValueError as e:
                raise UsageError(str(e)) from e
        else:
            context = _run_config(args).eval_protocol().contexts[0]
        path, rows, general = commands.cmd_bench(
            names, context, args.trials, args.tbs, _seed(args), out_dir,
            grid=args.grid, lift_size=args.lift,
        )
        print(commands.format_table(rows))
        if general:
            held = sum(1 for _, row in general if row.holds)
            print(f"generalization: {held}/{len(general)} (kernel, context) pairs hold")
        print(f"-> {path}")
        return EXIT_OK

    if args.command == "evolve":
        config = _run_config(args)
        outputs = commands.cmd_evolve(config, out_dir, mode=args.mode, budget=args.budget)
        stats = outputs.stats
        print(
            f"generated={stats['total_candidates']} accepted={stats['accepted']} "
            f"catastrophic={stats['catastrophic']} skipped={stats['skipped']}"
        )
        if outputs.best_source:
            print(outputs.best_source)
        return EXIT_RUNTIME if outputs.interrupted else EXIT_OK

    if args.command == "report":
        log_path = args.log or out_dir / "events.jsonl"
        config = _run_config(args) if args.config else None
        summary = commands.cmd_report(log_path, out_dir, config)
        print(
            f"generated={summary.generated} accepted={summary.accepted} "
            f"catastrophic={summary.catastrophic} skipped={summary.skipped} resets={summary.resets}"
        )
        if summary.best_source:
            print(f"best score {summary.best_score}:")
            print(summary.best_source)
        return EXIT_OK

    raise UsageError(f"Unknown command {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not logging.getLogger("ahd").handlers:
        configure_logging(level=args.log_level, service="ahd-cli")

    try:
        return _dispatch(args)
    except (UsageError, ConfigError, UnknownKernel) as e:
        print(f"ahd: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptLog as e:
        print(f"ahd: corrupt event log: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (AhdError, OSError) as e:
        logger.error("Command failed", extra={"extra_data": {"command": args.command, "error": str(e)}})
        print(f"ahd: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as e:
        # out-of-range arguments rejected by the domain constructors
        print(f"ahd: error: {e}", file=sys.stderr)
        return EXIT_USAGE
