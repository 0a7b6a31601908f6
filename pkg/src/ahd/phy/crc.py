"""
Cyclic Redundancy Checks

Bitwise GF(2) long division, MSB first, no reflection.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CrcPoly:
    """CRC polynomial spec; `poly` omits the leading x^width term."""
    name: str
    width: int
    poly: int
    init: int = 0

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


CRC16_CCITT_FALSE = CrcPoly(name="crc16-ccitt-false", width=16, poly=0x1021, init=0xFFFF)
CRC24A = CrcPoly(name="crc24a", width=24, poly=0x864CFB, init=0)
CRC24B = CrcPoly(name="crc24b", width=24, poly=0x800063, init=0)

POLYNOMIALS = {p.name: p for p in (CRC16_CCITT_FALSE, CRC24A, CRC24B)}


def crc_register(bits: np.ndarray, poly: CrcPoly) -> int:
    """Run the division register over `bits` and return its final value."""
    reg = poly.init & poly.mask
    top_shift = poly.width - 1
    for bit in np.asarray(bits, dtype=np.uint8).tolist():
        feedback = ((reg >> top_shift) & 1) ^ (bit & 1)
        reg = (reg << 1) & poly.mask
        if feedback:
            reg ^= poly.poly
    return reg


def int_to_bits(value: int, width: int) -> np.ndarray:
    """MSB-first bit vector of an integer."""
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for bit in np.asarray(bits, dtype=np.uint8).tolist():
        value = (value << 1) | (bit & 1)
    return value


def bytes_to_bits(data: bytes) -> np.ndarray:
    """MSB-first unpacking of a byte string."""
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def crc_compute(bits: np.ndarray, poly: CrcPoly = CRC16_CCITT_FALSE) -> np.ndarray:
    """CRC bits of `bits`; appending them yields a zero remainder."""
    return int_to_bits(crc_register(bits, poly), poly.width)


def crc_attach(bits: np.ndarray, poly: CrcPoly = CRC16_CCITT_FALSE) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    return np.concatenate([bits, crc_compute(bits, poly)])


def crc_check(bits_with_crc: np.ndarray, poly: CrcPoly = CRC16_CCITT_FALSE) -> bool:
    """True when the trailing CRC matches the preceding bits."""
    return crc_register(bits_with_crc, poly) == 0
