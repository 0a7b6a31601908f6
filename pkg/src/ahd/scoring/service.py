"""
Scoring Service

score_candidate runs the fixed protocol (same seeded TB batch for every
candidate) and folds the decode outcome into one scalar. Sandbox,
parse and kernel faults become catastrophic records instead of errors.
"""

import hashlib
import logging
import time
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from ahd.decoder import DEFAULT_LLR_CLIP, DEFAULT_MAX_ITERS, DecodeReport, KernelFault, decode_batch
from ahd.errors import AhdError
from ahd.kernels import CnuKernel, NumericFault
from ahd.kernelscript import (
    KernelProgram,
    KernelSyntaxError,
    SandboxFault,
    ScriptKernel,
    ValidationError,
    parse,
)
from ahd.phy import ChainConfig, Context, LlrFrame, default_graph, run_link

from .errors import ContextSimulationError, NoIntermediateZone
from .models import (
    ComparisonRow,
    EvalProtocol,
    GeneralizationRow,
    GridPoint,
    ScoreRecord,
)

logger = logging.getLogger(__name__)

Candidate = Union[CnuKernel, KernelProgram, str]

CATASTROPHIC_ERRORS = (KernelSyntaxError, ValidationError, SandboxFault, KernelFault, NumericFault)
DEFAULT_BAND = (0.3, 0.9)


def protocol_hash(protocol: EvalProtocol) -> str:
    """SHA-256 of the canonical protocol JSON."""
    return hashlib.sha256(protocol.canonical_json().encode("utf-8")).hexdigest()


def trial_seed(base_seed: int, trial: int) -> int:
    """Independent per-trial seed derived from (base_seed, trial)."""
    return int(np.random.SeedSequence([base_seed, trial]).generate_state(1)[0])


@lru_cache(maxsize=128)
def _link_frames(context: Context, n_tbs: int, seed: int, lift_size: int) -> tuple[LlrFrame, ...]:
    config = ChainConfig(lift_size=lift_size)
    _, frames = run_link(context, n_tbs, seed, graph=default_graph(lift_size), config=config)
    return tuple(frames)


def link_frames(context: Context, n_tbs: int, seed: int, lift_size: int = 16) -> tuple[LlrFrame, ...]:
    """Seeded TB batch of a context; cached because every candidate sees the same batch."""
    try:
        return _link_frames(context, n_tbs, seed, lift_size)
    except AhdError as e:
        raise ContextSimulationError(context, e) from e


def _as_kernel(candidate: Candidate, protocol: EvalProtocol) -> CnuKernel:
    if isinstance(candidate, CnuKernel):
        return candidate
    program = parse(candidate) if isinstance(candidate, str) else candidate
    return ScriptKernel(program, protocol.budget)


def decode_context(
    kernel: CnuKernel,
    context: Context,
    n_tbs: int,
    seed: int,
    *,
    lift_size: int = 16,
    max_iters: int = DEFAULT_MAX_ITERS,
    clip: float = DEFAULT_LLR_CLIP,
) -> DecodeReport:
    frames = link_frames(context, n_tbs, seed, lift_size)
    return decode_batch(
        default_graph(lift_size),
        frames,
        kernel,
        max_iters=max_iters,
        clip=clip,
        config=ChainConfig(lift_size=lift_size),
    )


def score_candidate(candidate: Candidate, protocol: Optional[EvalProtocol] = None) -> ScoreRecord:
    """Evaluate a kernel, program or program source under the protocol."""
    protocol = protocol or EvalProtocol()
    digest = protocol_hash(protocol)
    started = time.monotonic()
    try:
        kernel = _as_kernel(candidate, protocol)
        kernel.begin_evaluation()
        undecoded = 0
        total_iterations = 0
        bers: list[float] = []
        for context in protocol.contexts:
            report = decode_context(
                kernel,
                context,
                protocol.n_tbs,
                protocol.tb_batch_seed,
                lift_size=protocol.lift_size,
                max_iters=protocol.max_iters,
                clip=protocol.clip,
            )
            undecoded += report.n_undecoded
            total_iterations += report.total_iterations
            bers.extend(r.ber for r in report.results)
    except CATASTROPHIC_ERRORS as e:
        logger.info(
            "Candidate scored catastrophic",
            extra={"extra_data": {"fault": type(e).__name__, "detail": str(e)}},
        )
        return ScoreRecord.catastrophe(
            f"{type(e).__name__}: {e}",
            context_ids=protocol.context_ids,
            tb_batch_seed=protocol.tb_batch_seed,
            protocol_hash=digest,
        )

    record = ScoreRecord.build(
        undecoded=undecoded,
        mean_ber=float(np.mean(bers)),
        total_iterations=total_iterations,
        context_ids=protocol.context_ids,
        tb_batch_seed=protocol.tb_batch_seed,
        protocol_hash=digest,
    )
    logger.debug(
        "Candidate scored",
        extra={"extra_data": {
            "score": record.score,
            "seconds": round(time.monotonic() - started, 3),
        }},
    )
    return record


# =============================================================================
# Context sweeps
# =============================================================================


def sweep_grid(
    contexts: Iterable[Context],
    kernel: CnuKernel,
    n_tbs: int,
    seed: int,
    *,
    lift_size: int = 16,
    max_iters: int = DEFAULT_MAX_ITERS,
    clip: float = DEFAULT_LLR_CLIP,
) -> list[GridPoint]:
    """Success fraction, mean iterations and mean BER at every context."""
    points: list[GridPoint] = []
    for context in contexts:
        try:
            kernel.begin_evaluation()
            report = decode_context(
                kernel, context, n_tbs, seed,
                lift_size=lift_size, max_iters=max_iters, clip=clip,
            )
        except ContextSimulationError:
            raise
        except AhdError as e:
            raise ContextSimulationError(context, e) from e
        points.append(GridPoint(
            context=context,
            n_tbs=n_tbs,
            success_fraction=report.success_fraction,
            mean_iterations=report.mean_iterations,
            mean_ber=report.mean_ber,
        ))
    return points


def pick_boundary_context(
    grid_results: Sequence[GridPoint],
    band: tuple[float, float] = DEFAULT_BAND,
) -> Context:
    """
    The in-band context with the most mean iterations; ties go to the
    lowest SNR, then the highest MCS, then the most PRBs.
    """
    lo, hi = band
    in_band = [p for p in grid_results if lo <= p.success_fraction <= hi]
    if not in_band:
        raise NoIntermediateZone(f"No context with success fraction in [{lo}, {hi}]")
    best = min(
        in_band,
        key=lambda p: (
            -p.mean_iterations,
            p.context.snr_db,
            -p.context.mcs_index,
            -p.context.n_prb,
        ),
    )
    return best.context


# =============================================================================
# Kernel comparison
# =============================================================================


def compare_kernels(
    kernels: Mapping[str, CnuKernel],
    protocol: EvalProtocol,
    trials: int,
) -> list[ComparisonRow]:
    """
    Mean and standard deviation of decoded count, BER and iterations over
    `trials` independent TB batches per kernel and context.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    rows: list[ComparisonRow] = []
    for name, kernel in kernels.items():
        for context in protocol.contexts:
            decoded: list[int] = []
            bers: list[float] = []
            iterations: list[float] = []
            try:
                for trial in range(trials):
                    kernel.begin_evaluation()
                    report = decode_context(
                        kernel,
                        context,
                        protocol.n_tbs,
                        trial_seed(protocol.tb_batch_seed, trial),
                        lift_size=protocol.lift_size,
                        max_iters=protocol.max_iters,
                        clip=protocol.clip,
                    )
                    decoded.append(report.n_decoded)
                    bers.append(report.mean_ber)
                    iterations.append(report.mean_iterations)
            except CATASTROPHIC_ERRORS as e:
                rows.append(ComparisonRow(
                    kernel=name,
                    context_id=context.context_id,
                    trials=trials,
                    decoded_mean=0.0,
                    decoded_std=0.0,
                    ber_mean=0.0,
                    ber_std=0.0,
                    iterations_mean=0.0,
                    iterations_std=0.0,
                    catastrophic=True,
                    fault=f"{type(e).__name__}: {e}",
                ))
                continue
            rows.append(ComparisonRow(
                kernel=name,
                context_id=context.context_id,
                trials=trials,
                decoded_mean=float(np.mean(decoded)),
                decoded_std=float(np.std(decoded)),
                ber_mean=float(np.mean(bers)),
                ber_std=float(np.std(bers)),
                iterations_mean=float(np.mean(iterations)),
                iterations_std=float(np.std(iterations)),
            ))
    return rows


def generalization_check(
    kernel: CnuKernel,
    reference: CnuKernel,
    contexts: Iterable[Context],
    n_tbs: int,
    seed: int,
    *,
    tolerance: float = 0.1,
    lift_size: int = 16,
    max_iters: int = DEFAULT_MAX_ITERS,
    clip: float = DEFAULT_LLR_CLIP,
) -> list[GeneralizationRow]:
    """
    Re-run a kernel found on one context across a grid. It holds at a
    context when it does not fault and its success fraction is within
    `tolerance` of the reference kernel's.
    """
    rows: list[GeneralizationRow] = []
    contexts = list(contexts)
    reference_points = sweep_grid(
        contexts, reference, n_tbs, seed, lift_size=lift_size, max_iters=max_iters, clip=clip
    )
    for ref in reference_points:
        try:
            point = sweep_grid(
                [ref.context], kernel, n_tbs, seed,
                lift_size=lift_size, max_iters=max_iters, clip=clip,
            )[0]
            success, iterations = point.success_fraction, point.mean_iterations
            holds = success >= ref.success_fraction - tolerance
        except ContextSimulationError as e:
            if not isinstance(e.cause, CATASTROPHIC_ERRORS):
                raise
            success, iterations, holds = 0.0, float(max_iters), False
        rows.append(GeneralizationRow(
            context=ref.context,
            success_fraction=success,
            reference_success_fraction=ref.success_fraction,
            mean_iterations=iterations,
            reference_mean_iterations=ref.mean_iterations,
            holds=holds,
        ))
    return rows
