"""
Code Block Segmentation

Splits a transport block (payload + TB CRC) into code blocks of K info
bits. With more than one block each segment gets its own CB CRC; unused
info positions at the tail of every block are filler (shortened) bits.
"""

import numpy as np

from .crc import CrcPoly, crc_attach, crc_check
from .errors import LengthMismatch
from .models import BlockLayout


def segment_sizes(tb_bits: int, n_blocks: int) -> tuple[int, ...]:
    """Near-equal split; the first (tb_bits mod C) segments get one extra bit."""
    base, extra = divmod(tb_bits, n_blocks)
    return tuple(base + (1 if i < extra else 0) for i in range(n_blocks))


def segment(tb_bits: np.ndarray, layout: BlockLayout, cb_crc: CrcPoly) -> list[np.ndarray]:
    """Payload+CRC bits into K-bit code block info vectors (fillers are zero)."""
    tb_bits = np.asarray(tb_bits, dtype=np.uint8)
    if tb_bits.size != layout.tb_bits:
        raise LengthMismatch(f"Expected {layout.tb_bits} TB bits, got {tb_bits.size}")

    blocks: list[np.ndarray] = []
    start = 0
    for size in layout.segment_sizes:
        chunk = tb_bits[start:start + size]
        start += size
        if layout.cb_crc_bits:
            chunk = crc_attach(chunk, cb_crc)
        info = np.zeros(layout.k, dtype=np.uint8)
        info[:chunk.size] = chunk
        blocks.append(info)
    return blocks


def desegment(
    info_blocks: np.ndarray,
    layout: BlockLayout,
    cb_crc: CrcPoly,
) -> tuple[np.ndarray, bool]:
    """
    Reassemble TB bits from decoded info parts.

    Returns (tb_bits, all_cb_crcs_ok); the CB check is vacuous for a
    single-block TB.
    """
    info_blocks = np.asarray(info_blocks, dtype=np.uint8).reshape(layout.n_blocks, -1)
    pieces: list[np.ndarray] = []
    cb_ok = True
    for i, size in enumerate(layout.segment_sizes):
        carried = info_blocks[i, :size + layout.cb_crc_bits]
        if layout.cb_crc_bits and not crc_check(carried, cb_crc):
            cb_ok = False
        pieces.append(carried[:size])
    return np.concatenate(pieces), cb_ok
