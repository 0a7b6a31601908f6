"""
PHY Models

Operating points, MCS table entries, transport blocks and LLR frames.
"""

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Optional

import numpy as np

from .crc import CRC16_CCITT_FALSE, CrcPoly


class BitOrigin(IntEnum):
    """Where the LLR of a codeword position came from."""
    RECEIVED = 0
    PUNCTURED = 1
    SHORTENED = 2


MODULATION_NAMES = {2: "BPSK", 4: "QPSK", 16: "16QAM"}


@dataclass(frozen=True)
class McsEntry:
    """One row of the MCS table."""
    mcs_index: int
    modulation_order: int       # constellation size: 2, 4 or 16
    rate: Fraction

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.modulation_order))

    @property
    def modulation(self) -> str:
        return MODULATION_NAMES[self.modulation_order]


# Desk-scale table, rates realised by rate matching a rate-1/2 mother code
DEFAULT_MCS_TABLE: tuple[McsEntry, ...] = (
    McsEntry(0, 2, Fraction(1, 3)),
    McsEntry(1, 2, Fraction(1, 2)),
    McsEntry(2, 4, Fraction(1, 3)),
    McsEntry(3, 4, Fraction(1, 2)),
    McsEntry(4, 4, Fraction(2, 3)),
    McsEntry(5, 4, Fraction(3, 4)),
    McsEntry(6, 16, Fraction(1, 2)),
    McsEntry(7, 16, Fraction(2, 3)),
)


@dataclass(frozen=True, order=True)
class Context:
    """Operating point: PRB count, MCS index and SNR in dB."""
    n_prb: int
    mcs_index: int
    snr_db: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")
        if self.n_prb < 1:
            raise ValueError(f"n_prb must be positive, got {self.n_prb}")

    @property
    def context_id(self) -> str:
        return f"prb{self.n_prb}-mcs{self.mcs_index}-snr{self.snr_db:g}"

    def to_dict(self) -> dict:
        return {"n_prb": self.n_prb, "mcs_index": self.mcs_index, "snr_db": self.snr_db}

    @classmethod
    def from_dict(cls, data: dict) -> "Context":
        return cls(
            n_prb=int(data["n_prb"]),
            mcs_index=int(data["mcs_index"]),
            snr_db=float(data["snr_db"]),
        )


@dataclass
class ChainConfig:
    """Link-chain knobs."""
    lift_size: int = 16
    re_per_prb: int = 48                # 12 subcarriers x 4 symbols
    llr_sat: float = 20.0
    tb_crc: CrcPoly = CRC16_CCITT_FALSE
    cb_crc: CrcPoly = CRC16_CCITT_FALSE
    interleaver_depth: Optional[int] = None  # None: bits per symbol
    mcs_table: tuple[McsEntry, ...] = DEFAULT_MCS_TABLE
    min_payload_bits: int = 8

    def mcs(self, mcs_index: int) -> McsEntry:
        for entry in self.mcs_table:
            if entry.mcs_index == mcs_index:
                return entry
        raise KeyError(mcs_index)


@dataclass(frozen=True)
class BlockLayout:
    """
    How one transport block maps onto code blocks.

    Code block i carries `segment_sizes[i]` TB bits followed by a CB CRC
    of `cb_crc_bits` (zero when there is a single block); the rest of
    its K info positions are filler bits.
    """
    n_blocks: int
    k: int
    n: int
    payload_bits: int
    tb_crc_bits: int
    cb_crc_bits: int
    segment_sizes: tuple[int, ...]
    target_len: int             # rate-matched bits per code block
    modulation_order: int

    @property
    def tb_bits(self) -> int:
        return self.payload_bits + self.tb_crc_bits

    def filler_positions(self, block: int) -> np.ndarray:
        """Filler positions inside one code block, in [0, N)."""
        start = self.segment_sizes[block] + self.cb_crc_bits
        return np.arange(start, self.k, dtype=np.int64)

    @property
    def total_coded_bits(self) -> int:
        return self.n_blocks * self.target_len


@dataclass
class TransportBlock:
    """A transport block and its encoded form."""
    index: int
    payload: np.ndarray
    crc: np.ndarray
    code_blocks: list[np.ndarray]       # K info bits per block, fillers included
    codewords: np.ndarray               # (n_blocks, N)
    layout: BlockLayout
    context: Context

    @property
    def tb_bits(self) -> np.ndarray:
        return np.concatenate([self.payload, self.crc])


@dataclass
class LlrFrame:
    """
    Receiver-side LLRs of one transport block, one value per codeword bit
    position of every code block (blocks concatenated). Positive values
    favour bit 0.
    """
    values: np.ndarray
    flags: np.ndarray
    layout: Optional[BlockLayout] = None
    truth: Optional[np.ndarray] = None      # transmitted TB payload
    tb_index: int = 0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.flags = np.asarray(self.flags, dtype=np.uint8)
        if self.values.shape != self.flags.shape:
            raise ValueError("values and flags must have the same shape")

    def replace(self, values: np.ndarray, flags: Optional[np.ndarray] = None) -> "LlrFrame":
        return LlrFrame(
            values=values,
            flags=self.flags.copy() if flags is None else flags,
            layout=self.layout,
            truth=self.truth,
            tb_index=self.tb_index,
        )

    def blocks(self, n: int) -> np.ndarray:
        """Values reshaped to (n_blocks, N)."""
        return self.values.reshape(-1, n)

    def count(self, origin: BitOrigin) -> int:
        return int(np.count_nonzero(self.flags == origin))

