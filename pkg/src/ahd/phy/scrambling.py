"""
Scrambling

Fibonacci LFSR whitening sequence. The register is loaded with the seed
(bit i of the seed in cell i); each step emits cell 0 and shifts in
cell[0] ^ cell[tap]. With the default width 31 and tap 3 this is the
x^31 + x^3 + 1 recursion used for 5G Gold sequences. A zero seed yields
the all-zero sequence, so scrambling with seed 0 is the identity.
"""

import numpy as np

LFSR_WIDTH = 31
LFSR_TAP = 3


def lfsr_sequence(
    seed: int,
    length: int,
    width: int = LFSR_WIDTH,
    tap: int = LFSR_TAP,
    warmup: int = 0,
) -> np.ndarray:
    """First `length` output bits of the LFSR after `warmup` discarded steps."""
    if not 0 <= seed < (1 << width):
        raise ValueError(f"Seed {seed} does not fit a {width}-bit register")
    cells = [(seed >> i) & 1 for i in range(width)]
    out = np.empty(length, dtype=np.uint8)
    for step in range(warmup + length):
        bit = cells[0]
        cells.append(cells[0] ^ cells[tap])
        del cells[0]
        if step >= warmup:
            out[step - warmup] = bit
    return out


def scramble(values: np.ndarray, seed: int, width: int = LFSR_WIDTH) -> np.ndarray:
    """
    Scramble bits by XOR, or LLRs by sign flip, with the LFSR sequence.

    Self-inverse: applying it twice with the same seed is the identity.
    """
    values = np.asarray(values)
    seq = lfsr_sequence(seed, values.size, width=width).reshape(values.shape)
    if np.issubdtype(values.dtype, np.floating):
        return values * (1.0 - 2.0 * seq)
    return (values.astype(np.uint8) ^ seq).astype(np.uint8)


descramble = scramble


def scrambling_seed(seed: int, tb_index: int, width: int = LFSR_WIDTH) -> int:
    """Per-TB register seed derived from the link seed and TB index (never zero)."""
    mixed = (int(seed) * 1_000_003 + int(tb_index) * 7_919) % ((1 << width) - 1)
    return mixed + 1
