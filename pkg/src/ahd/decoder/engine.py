"""
Decoder Engine

Flooding belief propagation over batches of LLR frames. One iteration is

    CNU (pluggable kernel) -> clip -> VNU -> hard decision
    -> syndrome + CRC per still-active TB

A TB whose code blocks all satisfy the parity checks and whose CB and TB
CRCs verify is marked decoded and leaves the batch; only active blocks
cost CNU edge operations.
"""

import logging
from collections import defaultdict
from typing import Callable, Optional, Sequence

import numpy as np

from ahd.errors import AhdError
from ahd.kernels import CnuKernel
from ahd.phy import ChainConfig, LlrFrame, crc_check, desegment
from ahd.tanner import TannerGraph, batch_syndrome

from .errors import KernelFault, LengthMismatch, NonFiniteInput, NonPositiveClip
from .models import DEFAULT_LLR_CLIP, DEFAULT_MAX_ITERS, DecodeReport, EdgeMessages, TbResult

logger = logging.getLogger(__name__)

Kernel = Callable[[np.ndarray], np.ndarray]


def clip_llrs(frame: LlrFrame, clip: float) -> LlrFrame:
    """Saturate frame values to [-clip, clip]; flags are kept."""
    if not clip > 0:
        raise NonPositiveClip(f"clip must be positive, got {clip}")
    return frame.replace(np.clip(frame.values, -clip, clip), frame.flags.copy())


def hard_decide(posterior: np.ndarray) -> np.ndarray:
    """Bit 1 iff LLR < 0; an exact zero decides 0."""
    posterior = np.asarray(posterior, dtype=np.float64)
    if not np.all(np.isfinite(posterior)):
        raise NonFiniteInput("Posterior LLRs contain NaN or Inf")
    return (posterior < 0).astype(np.uint8)


def vnu_step(
    graph: TannerGraph,
    channel_llrs: np.ndarray,
    c2v: np.ndarray,
    clip: Optional[float] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Variable-node update.

    posterior[v] = channel[v] + sum of c2v over the edges of v, and
    v2c[e] = posterior[var(e)] - c2v[e]. Works on single blocks (N,)/(E,)
    or batches (B, N)/(B, E). Outputs are clipped when `clip` is given.
    """
    channel = np.asarray(channel_llrs, dtype=np.float64)
    c2v = np.asarray(c2v, dtype=np.float64)
    single = channel.ndim == 1
    channel = np.atleast_2d(channel)
    c2v = np.atleast_2d(c2v)
    if channel.shape[-1] != graph.n_vars or c2v.shape[-1] != graph.n_edges:
        raise LengthMismatch(
            f"Expected {graph.n_vars} channel LLRs and {graph.n_edges} messages, "
            f"got {channel.shape[-1]} and {c2v.shape[-1]}"
        )
    if channel.shape[0] != c2v.shape[0]:
        raise LengthMismatch("Channel and message batch sizes differ")

    batch = channel.shape[0]
    flat = (np.arange(batch)[:, None] * graph.n_vars + graph.edge_var[None, :]).ravel()
    sums = np.bincount(flat, weights=c2v.ravel(), minlength=batch * graph.n_vars)
    posterior = channel + sums.reshape(batch, graph.n_vars)
    v2c = posterior[:, graph.edge_var] - c2v
    if clip is not None:
        v2c = np.clip(v2c, -clip, clip)
        posterior = np.clip(posterior, -clip, clip)
    if single:
        return v2c[0], posterior[0]
    return v2c, posterior


def _degree_groups(graph: TannerGraph) -> list[np.ndarray]:
    """Base-row edge groups merged by check degree, each (checks, degree)."""
    by_degree: dict[int, list[np.ndarray]] = defaultdict(list)
    for group in graph.row_groups:
        by_degree[group.shape[1]].append(group)
    return [np.concatenate(groups, axis=0) for _, groups in sorted(by_degree.items())]


def cnu_step(groups: Sequence[np.ndarray], v2c: np.ndarray, kernel: Kernel) -> np.ndarray:
    """Apply the kernel to every check node of a (B, E) message batch."""
    c2v = np.empty_like(v2c)
    batch = v2c.shape[0]
    for group in groups:
        rows = v2c[:, group].reshape(-1, group.shape[1])
        try:
            out = np.asarray(kernel(rows), dtype=np.float64)
        except (AhdError, ArithmeticError) as e:
            raise KernelFault(str(e), kind=getattr(e, "kind", "numeric")) from e
        if out.shape != rows.shape:
            raise KernelFault(f"Kernel returned shape {out.shape}, expected {rows.shape}")
        if not np.all(np.isfinite(out)):
            raise KernelFault("Kernel produced non-finite messages", kind="numeric")
        c2v[:, group] = out.reshape(batch, *group.shape)
    return c2v


def decode_batch(
    graph: TannerGraph,
    frames: Sequence[LlrFrame],
    kernel: Kernel,
    max_iters: int = DEFAULT_MAX_ITERS,
    clip: float = DEFAULT_LLR_CLIP,
    *,
    config: Optional[ChainConfig] = None,
    trace: bool = False,
) -> DecodeReport:
    """
    Decode a batch of TB frames.

    Frames with a layout are checked with syndromes and CB/TB CRCs and
    scored against their payload truth. Frames without a layout are
    treated as one bare code block that is decoded once its syndrome is
    zero; their errors are counted over the K info bits.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    if not clip > 0:
        raise NonPositiveClip(f"clip must be positive, got {clip}")
    config = config or ChainConfig()
    if isinstance(kernel, CnuKernel):
        kernel.begin_decode()

    n = graph.n_vars
    channel_parts: list[np.ndarray] = []
    owner_parts: list[np.ndarray] = []
    for tb, frame in enumerate(frames):
        if frame.values.size % n:
            raise LengthMismatch(f"Frame {tb} length {frame.values.size} is not a multiple of N={n}")
        blocks = np.clip(frame.blocks(n), -clip, clip)
        channel_parts.append(blocks)
        owner_parts.append(np.full(blocks.shape[0], tb, dtype=np.int64))

    channel = np.concatenate(channel_parts) if channel_parts else np.empty((0, n))
    owner = np.concatenate(owner_parts) if owner_parts else np.empty(0, dtype=np.int64)
    groups = _degree_groups(graph)

    messages = EdgeMessages.initial(channel[:, graph.edge_var])
    hard = hard_decide(channel)
    active = np.ones(len(frames), dtype=bool)
    decoded = np.zeros(len(frames), dtype=bool)
    iterations = np.full(len(frames), max_iters, dtype=np.int64)
    edge_ops = 0
    steps: list[tuple[int, tuple[int, ...]]] = []

    for iteration in range(1, max_iters + 1):
        rows = np.nonzero(active[owner])[0]
        if rows.size == 0:
            break
        if trace:
            steps.append((iteration, tuple(int(t) for t in np.nonzero(active)[0])))

        state = messages.select(rows)
        c2v = np.clip(cnu_step(groups, state.v2c, kernel), -clip, clip)
        edge_ops += rows.size * graph.n_edges
        v2c, posterior = vnu_step(graph, channel[rows], c2v, clip)
        messages.v2c[rows] = v2c
        messages.c2v[rows] = c2v
        hard[rows] = hard_decide(posterior)

        parity_ok = ~batch_syndrome(graph, hard[rows]).any(axis=1)
        for tb in np.unique(owner[rows]):
            mine = owner[rows] == tb
            if parity_ok[mine].all() and _crc_ok(frames[tb], hard[owner == tb], graph, config):
                active[tb] = False
                decoded[tb] = True
                iterations[tb] = iteration

    results = [
        TbResult(
            tb_index=frame.tb_index,
            decoded=bool(decoded[tb]),
            iterations_used=int(iterations[tb]),
            bit_errors=_bit_errors(frame, hard[owner == tb], graph, config),
            info_bits=_info_bits(frame, graph),
        )
        for tb, frame in enumerate(frames)
    ]
    report = DecodeReport(
        results=results,
        total_cnu_edge_ops=edge_ops,
        max_iters=max_iters,
        trace=steps if trace else None,
    )
    logger.debug(
        "Decoded batch",
        extra={"extra_data": {
            "tbs": report.n_tbs,
            "decoded": report.n_decoded,
            "edge_ops": edge_ops,
        }},
    )
    return report


def _crc_ok(frame: LlrFrame, hard: np.ndarray, graph: TannerGraph, config: ChainConfig) -> bool:
    if frame.layout is None:
        return True
    tb_bits, cb_ok = desegment(hard[:, :graph.k], frame.layout, config.cb_crc)
    return cb_ok and crc_check(tb_bits, config.tb_crc)


def _decoded_bits(frame: LlrFrame, hard: np.ndarray, graph: TannerGraph, config: ChainConfig) -> np.ndarray:
    if frame.layout is None:
        return hard[0, :graph.k]
    tb_bits, _ = desegment(hard[:, :graph.k], frame.layout, config.cb_crc)
    return tb_bits[:frame.layout.payload_bits]


def _info_bits(frame: LlrFrame, graph: TannerGraph) -> int:
    if frame.layout is None:
        return graph.k if frame.truth is None else int(np.asarray(frame.truth).size)
    return frame.layout.payload_bits


def _bit_errors(frame: LlrFrame, hard: np.ndarray, graph: TannerGraph, config: ChainConfig) -> int:
    if frame.truth is None:
        return 0
    bits = _decoded_bits(frame, hard, graph, config)
    truth = np.asarray(frame.truth, dtype=np.uint8)
    return int(np.count_nonzero(bits[:truth.size] != truth))
