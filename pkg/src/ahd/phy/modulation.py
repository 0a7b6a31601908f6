"""
Modulation, AWGN and Soft Demapping

Unit-energy Gray constellations (BPSK, QPSK, 16QAM with the 5G NR bit
labelling). BPSK is real-valued and sees real AWGN of variance sigma^2;
QPSK/16QAM see complex AWGN of total variance sigma^2. Soft demapping
follows the convention that a positive LLR favours bit 0.
"""

import math
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import BadLength, NonPositiveNoise

SUPPORTED_ORDERS = (2, 4, 16)


def _bits_per_symbol(order: int) -> int:
    if order not in SUPPORTED_ORDERS:
        raise BadLength(f"Unsupported modulation order {order}")
    return int(math.log2(order))


@lru_cache(maxsize=None)
def constellation(order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Constellation points and their bit labels.

    Returns (points (order,), labels (order, bits_per_symbol)).
    """
    q = _bits_per_symbol(order)
    labels = np.array(
        [[(idx >> (q - 1 - i)) & 1 for i in range(q)] for idx in range(order)],
        dtype=np.uint8,
    )
    signs = 1.0 - 2.0 * labels.astype(np.float64)
    if order == 2:
        points = signs[:, 0].astype(np.complex128)
    elif order == 4:
        points = (signs[:, 0] + 1j * signs[:, 1]) / math.sqrt(2.0)
    else:
        real = signs[:, 0] * (2.0 - signs[:, 2])
        imag = signs[:, 1] * (2.0 - signs[:, 3])
        points = (real + 1j * imag) / math.sqrt(10.0)
    points.setflags(write=False)
    labels.setflags(write=False)
    return points, labels


def modulate(bits: np.ndarray, order: int) -> np.ndarray:
    """Map bits to symbols; BPSK gives real symbols (+1 for bit 0)."""
    q = _bits_per_symbol(order)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % q:
        raise BadLength(f"{bits.size} bits not divisible by {q} bits per symbol")
    groups = bits.reshape(-1, q).astype(np.int64)
    weights = 1 << np.arange(q - 1, -1, -1)
    indices = groups @ weights
    points, _ = constellation(order)
    symbols = points[indices]
    if order == 2:
        return symbols.real.copy()
    return symbols


def snr_to_noise_var(snr_db: float) -> float:
    """sigma^2 for unit symbol energy."""
    return float(10.0 ** (-snr_db / 10.0))


def awgn(
    symbols: np.ndarray,
    snr_db: float,
    rng_seed: Union[int, np.random.Generator, None] = None,
) -> np.ndarray:
    """
    Add white Gaussian noise at `snr_db`. Real inputs get real noise of
    variance sigma^2, complex inputs complex noise of total variance sigma^2.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    symbols = np.asarray(symbols)
    noise_var = snr_to_noise_var(snr_db)
    if np.iscomplexobj(symbols):
        scale = math.sqrt(noise_var / 2.0)
        noise = rng.standard_normal((2,) + symbols.shape)
        return symbols + scale * (noise[0] + 1j * noise[1])
    return symbols + math.sqrt(noise_var) * rng.standard_normal(symbols.shape)


def demap(noisy: np.ndarray, order: int, noise_var: float) -> np.ndarray:
    """
    Soft demapper. BPSK uses the exact 2y/sigma^2; higher orders use the
    max-log approximation (min distance to bit-1 points minus min distance
    to bit-0 points, over sigma^2).
    """
    if not noise_var > 0:
        raise NonPositiveNoise(f"Noise variance must be positive, got {noise_var}")
    q = _bits_per_symbol(order)
    noisy = np.asarray(noisy)
    if order == 2:
        return 2.0 * np.real(noisy).astype(np.float64) / noise_var

    points, labels = constellation(order)
    dist = np.abs(noisy.reshape(-1, 1) - points.reshape(1, -1)) ** 2
    llrs = np.empty((dist.shape[0], q), dtype=np.float64)
    for i in range(q):
        zero = labels[:, i] == 0
        d0 = dist[:, zero].min(axis=1)
        d1 = dist[:, ~zero].min(axis=1)
        llrs[:, i] = (d1 - d0) / noise_var
    return llrs.reshape(-1)
