"""
Rate Matching

Simplified circular-buffer rate matching with filler skipping, the block
(de)interleaver, and shortening recovery.
"""

from typing import Optional

import numpy as np

from .errors import IndexOutOfRange, LengthMismatch
from .models import BitOrigin, LlrFrame


def transmit_positions(n: int, target_len: int, skip: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Codeword positions sent, in order: the circular buffer walks the
    non-skipped positions from 0 and wraps around when target_len exceeds
    them (repetition) or stops early (tail puncturing).
    """
    available = np.arange(n, dtype=np.int64)
    if skip is not None and len(skip):
        available = np.setdiff1d(available, np.asarray(skip, dtype=np.int64))
    if available.size == 0:
        raise LengthMismatch("No transmittable positions")
    return available[np.arange(target_len) % available.size]


def rate_match(
    codeword: np.ndarray,
    target_len: int,
    skip: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Select `target_len` transmitted bits from a codeword."""
    codeword = np.asarray(codeword)
    return codeword[transmit_positions(codeword.size, target_len, skip)]


def rate_dematch(
    llrs: np.ndarray,
    n: int,
    skip: Optional[np.ndarray] = None,
) -> LlrFrame:
    """
    Restore a length-N frame: repeated observations are combined by
    summation, positions never transmitted get LLR 0 and are flagged
    punctured.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 1:
        raise LengthMismatch("Rate dematching expects a 1-D LLR vector")
    positions = transmit_positions(n, llrs.size, skip)
    values = np.zeros(n, dtype=np.float64)
    np.add.at(values, positions, llrs)
    flags = np.full(n, BitOrigin.PUNCTURED, dtype=np.uint8)
    flags[positions] = BitOrigin.RECEIVED
    return LlrFrame(values=values, flags=flags)


def shortening_recover(
    frame: LlrFrame,
    filler_positions: np.ndarray,
    llr_sat: float = 20.0,
) -> LlrFrame:
    """Pin filler positions to +llr_sat (known zeros) and flag them shortened."""
    positions = np.asarray(filler_positions, dtype=np.int64)
    if positions.size and (positions.min() < 0 or positions.max() >= frame.values.size):
        raise IndexOutOfRange(f"Filler positions outside [0, {frame.values.size})")
    values = frame.values.copy()
    flags = frame.flags.copy()
    values[positions] = llr_sat
    flags[positions] = BitOrigin.SHORTENED
    return frame.replace(values, flags)


def interleaver_permutation(length: int, depth: int) -> np.ndarray:
    """
    Block interleaver: write row by row into `depth` rows, read column by
    column. Returns indices such that interleaved = x[perm].
    """
    if depth <= 1 or length <= 1:
        return np.arange(length, dtype=np.int64)
    cols = -(-length // depth)
    grid = np.arange(depth * cols, dtype=np.int64).reshape(depth, cols)
    order = grid.T.ravel()
    return order[order < length]


def block_interleave(values: np.ndarray, depth: int) -> np.ndarray:
    values = np.asarray(values)
    return values[interleaver_permutation(values.size, depth)]


def block_deinterleave(values: np.ndarray, depth: int) -> np.ndarray:
    values = np.asarray(values)
    perm = interleaver_permutation(values.size, depth)
    out = np.empty_like(values)
    out[perm] = values
    return out
