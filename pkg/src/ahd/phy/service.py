"""
Link Service

The link-level chain around the decoder, in transmit order:

    TB payload -> TB CRC -> segmentation (+CB CRC, fillers) -> LDPC encode
    -> rate match -> bit interleave -> scramble -> modulate -> AWGN

and the receiver pre-processing that feeds the decoder:

    soft demap -> descramble -> de-interleave -> rate dematch
    -> shortening recovery

run_link is a pure function of (context, n_tbs, seed): TB i draws its
payload and noise from the generator seeded with (seed, i), so the same
TB sees the same payload and unit noise at every SNR.
"""

import csv
import logging
import math
import os
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ahd.tanner import CodeSpec, TannerGraph, build_code, default_spec_path, encode, load_spec

from .crc import crc_compute
from .errors import InvalidContext
from .modulation import awgn, demap, modulate, snr_to_noise_var
from .models import (
    DEFAULT_MCS_TABLE,
    BlockLayout,
    ChainConfig,
    Context,
    LlrFrame,
    McsEntry,
    TransportBlock,
)
from .ratematch import (
    block_deinterleave,
    block_interleave,
    rate_dematch,
    rate_match,
    shortening_recover,
)
from .scrambling import descramble, scramble, scrambling_seed
from .segmentation import segment, segment_sizes

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def default_seed() -> int:
    """Global default seed from AHD_SEED (0 when unset)."""
    return int(os.getenv("AHD_SEED", "0"))


@lru_cache(maxsize=16)
def graph_for(spec: CodeSpec) -> TannerGraph:
    return build_code(spec)


@lru_cache(maxsize=8)
def default_graph(lift_size: int = 16) -> TannerGraph:
    return graph_for(load_spec(default_spec_path(lift_size)))


# =============================================================================
# Context mapping
# =============================================================================


def context_resources(context: Context, graph: TannerGraph, config: ChainConfig) -> BlockLayout:
    """
    Derive the TB layout of a context.

    G = n_prb * re_per_prb * bits_per_symbol coded bits are available;
    floor(rate * G) of them carry payload, TB CRC and CB CRCs.
    """
    try:
        mcs = config.mcs(context.mcs_index)
    except KeyError as e:
        raise InvalidContext(f"Unknown MCS index {context.mcs_index}") from e

    q = mcs.bits_per_symbol
    coded_bits = context.n_prb * config.re_per_prb * q
    budget = math.floor(mcs.rate * coded_bits)
    k = graph.k
    tb_crc = config.tb_crc.width
    cb_crc = config.cb_crc.width

    if budget <= k:
        n_blocks, cb_bits = 1, 0
    else:
        if k <= cb_crc:
            raise InvalidContext(
                f"Context {context.context_id} needs segmentation but K={k} leaves no room "
                f"beside a {cb_crc}-bit code block CRC"
            )
        n_blocks = math.ceil(budget / (k - cb_crc))
        cb_bits = cb_crc
    payload = budget - tb_crc - n_blocks * cb_bits
    if payload < config.min_payload_bits:
        raise InvalidContext(
            f"Context {context.context_id} leaves {payload} payload bits "
            f"(minimum {config.min_payload_bits})"
        )

    symbols_per_block = (coded_bits // q) // n_blocks
    return BlockLayout(
        n_blocks=n_blocks,
        k=k,
        n=graph.n,
        payload_bits=payload,
        tb_crc_bits=tb_crc,
        cb_crc_bits=cb_bits,
        segment_sizes=segment_sizes(payload + tb_crc, n_blocks),
        target_len=symbols_per_block * q,
        modulation_order=mcs.modulation_order,
    )


# =============================================================================
# Transmit / receive
# =============================================================================


def build_transport_block(
    index: int,
    payload: np.ndarray,
    context: Context,
    layout: BlockLayout,
    graph: TannerGraph,
    config: ChainConfig,
) -> TransportBlock:
    """CRC attachment, segmentation and encoding of one TB."""
    payload = np.asarray(payload, dtype=np.uint8)
    crc = crc_compute(payload, config.tb_crc)
    blocks = segment(np.concatenate([payload, crc]), layout, config.cb_crc)
    codewords = np.stack([encode(graph, info) for info in blocks])
    return TransportBlock(
        index=index,
        payload=payload,
        crc=crc,
        code_blocks=blocks,
        codewords=codewords,
        layout=layout,
        context=context,
    )


def transmit_bits(tb: TransportBlock, config: ChainConfig, scramble_seed: int) -> np.ndarray:
    """Rate-matched, interleaved, scrambled bit stream of a TB."""
    layout = tb.layout
    depth = _interleaver_depth(layout, config)
    streams = [
        block_interleave(
            rate_match(tb.codewords[i], layout.target_len, skip=layout.filler_positions(i)),
            depth,
        )
        for i in range(layout.n_blocks)
    ]
    return scramble(np.concatenate(streams), scramble_seed)


def receive_llrs(
    llrs: np.ndarray,
    layout: BlockLayout,
    config: ChainConfig,
    scramble_seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Receiver pre-processing back to per-codeword-position LLRs and flags."""
    llrs = descramble(np.asarray(llrs, dtype=np.float64), scramble_seed)
    depth = _interleaver_depth(layout, config)
    values: list[np.ndarray] = []
    flags: list[np.ndarray] = []
    for i in range(layout.n_blocks):
        chunk = llrs[i * layout.target_len:(i + 1) * layout.target_len]
        fillers = layout.filler_positions(i)
        frame = rate_dematch(block_deinterleave(chunk, depth), layout.n, skip=fillers)
        frame = shortening_recover(frame, fillers, config.llr_sat)
        values.append(frame.values)
        flags.append(frame.flags)
    return np.concatenate(values), np.concatenate(flags)


def _interleaver_depth(layout: BlockLayout, config: ChainConfig) -> int:
    if config.interleaver_depth is not None:
        return config.interleaver_depth
    return int(math.log2(layout.modulation_order))


def run_link(
    context: Context,
    n_tbs: int,
    seed: Optional[int] = None,
    *,
    graph: Optional[TannerGraph] = None,
    config: Optional[ChainConfig] = None,
) -> tuple[list[TransportBlock], list[LlrFrame]]:
    """
    Generate `n_tbs` transport blocks at `context` and the LLR frames the
    decoder receives for them. Frames carry the ground-truth payload.
    """
    if n_tbs < 1:
        raise ValueError(f"n_tbs must be >= 1, got {n_tbs}")
    config = config or ChainConfig()
    graph = graph or default_graph(config.lift_size)
    seed = default_seed() if seed is None else seed

    layout = context_resources(context, graph, config)
    noise_var = snr_to_noise_var(context.snr_db)

    blocks: list[TransportBlock] = []
    frames: list[LlrFrame] = []
    for index in range(n_tbs):
        rng = np.random.default_rng([seed, index])
        payload = rng.integers(0, 2, size=layout.payload_bits, dtype=np.uint8)
        tb = build_transport_block(index, payload, context, layout, graph, config)

        s_seed = scrambling_seed(seed, index)
        symbols = modulate(transmit_bits(tb, config, s_seed), layout.modulation_order)
        noisy = awgn(symbols, context.snr_db, rng)
        values, flags = receive_llrs(
            demap(noisy, layout.modulation_order, noise_var), layout, config, s_seed
        )

        blocks.append(tb)
        frames.append(LlrFrame(
            values=values,
            flags=flags,
            layout=layout,
            truth=payload,
            tb_index=index,
        ))

    logger.debug(
        "Generated link batch",
        extra={"extra_data": {"context": context.context_id, "n_tbs": n_tbs, "seed": seed}},
    )
    return blocks, frames


# =============================================================================
# CSV interfaces
# =============================================================================


def load_context_grid(path: Union[str, Path]) -> list[Context]:
    """Context grid CSV with columns n_prb,mcs_index,snr_db."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [Context.from_dict(row) for row in rows]


def load_mcs_table(path: Union[str, Path]) -> tuple[McsEntry, ...]:
    """MCS table CSV with columns mcs_index,modulation_order,rate (rate as a fraction)."""
    entries: list[McsEntry] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(line for line in fh if not line.startswith("#")):
            entries.append(McsEntry(
                mcs_index=int(row["mcs_index"]),
                modulation_order=int(row["modulation_order"]),
                rate=Fraction(row["rate"]),
            ))
    return tuple(sorted(entries, key=lambda e: e.mcs_index)) or DEFAULT_MCS_TABLE
