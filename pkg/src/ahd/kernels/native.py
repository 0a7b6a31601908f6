"""
Native CNU Kernels

All kernels take a (rows, degree) array of incoming messages and return
the per-edge leave-one-out result. Leave-one-out reductions are computed
with prefix/suffix scans so no division is involved.
"""

from typing import Callable

import numpy as np

from .errors import NumericFault
from .models import KernelParams, check_input

_LN2 = float(np.log(2.0))


# =============================================================================
# Leave-one-out reductions
# =============================================================================


def _exclusive(
    values: np.ndarray,
    accumulate: Callable[..., np.ndarray],
    combine: Callable[[np.ndarray, np.ndarray], np.ndarray],
    identity: float,
) -> np.ndarray:
    fill = np.full_like(values[..., :1], identity)
    prefix = np.concatenate([fill, accumulate(values[..., :-1], axis=-1)], axis=-1)
    suffix = np.concatenate([accumulate(values[..., :0:-1], axis=-1)[..., ::-1], fill], axis=-1)
    return combine(prefix, suffix)


def exclusive_sum(values: np.ndarray) -> np.ndarray:
    return _exclusive(values, np.cumsum, np.add, 0.0)


def exclusive_prod(values: np.ndarray) -> np.ndarray:
    return _exclusive(values, np.cumprod, np.multiply, 1.0)


def exclusive_min(values: np.ndarray) -> np.ndarray:
    return _exclusive(values, np.minimum.accumulate, np.minimum, np.inf)


def sign(values: np.ndarray) -> np.ndarray:
    """Sign with sgn(0) = +1."""
    return np.where(values < 0, -1.0, 1.0)


def phi(x: np.ndarray) -> np.ndarray:
    """
    phi(x) = -ln(tanh(x/2)) for x > 0, written as
    ln(1 + e^-x) - ln(1 - e^-x) with ln(1 - e^-x) switched between
    log(-expm1(-x)) and log1p(-exp(-x)) at ln 2 to keep full precision.
    """
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        log1mexp = np.where(x > _LN2, np.log1p(-np.exp(-x)), np.log(-np.expm1(-x)))
    return np.log1p(np.exp(-x)) - log1mexp


def _finite(out: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(out)):
        raise NumericFault(f"{name} produced non-finite output")
    return out


# =============================================================================
# Kernels
# =============================================================================


def boxplus(rows: np.ndarray, params: KernelParams = KernelParams()) -> np.ndarray:
    """Exact sum-product rule: 2 atanh(prod_{i!=j} tanh(L_i/2))."""
    rows = check_input(rows)
    product = exclusive_prod(np.tanh(rows / 2.0))
    product = np.clip(product, -params.atanh_clip, params.atanh_clip)
    return _finite(2.0 * np.arctanh(product), "boxplus")


def boxplus_phi(rows: np.ndarray, params: KernelParams = KernelParams()) -> np.ndarray:
    """Sum-domain sum-product through the self-inverse phi map."""
    rows = check_input(rows)
    signs = exclusive_prod(sign(rows))
    mags = phi(np.clip(np.abs(rows), params.phi_clip_lo, params.phi_clip_hi))
    total = exclusive_sum(mags)
    out = signs * phi(np.clip(total, params.phi_clip_lo, params.phi_clip_hi))
    return _finite(out, "boxplus-phi")


def min_sum(rows: np.ndarray, params: KernelParams = KernelParams()) -> np.ndarray:
    rows = check_input(rows)
    return exclusive_prod(sign(rows)) * exclusive_min(np.abs(rows))


def offset_min_sum(rows: np.ndarray, params: KernelParams = KernelParams()) -> np.ndarray:
    rows = check_input(rows)
    mags = np.maximum(exclusive_min(np.abs(rows)) - params.beta, 0.0)
    return exclusive_prod(sign(rows)) * mags


def discovered(rows: np.ndarray, params: KernelParams = KernelParams()) -> np.ndarray:
    """
    Product of tanh(L/2) with the sign split off in the tanh domain, the
    magnitudes multiplied in the log domain, the own edge divided out of
    the total, and clamping applied only at the atanh input.
    """
    rows = check_input(rows)
    t = np.tanh(rows / 2.0)
    s = sign(t)
    g = np.log(np.abs(t) + params.log_eps)
    total = g.sum(axis=-1, keepdims=True)
    mag = np.exp(total - g)
    signs = s.prod(axis=-1, keepdims=True) * s
    p = np.clip(signs * mag, -params.atanh_clip, params.atanh_clip)
    return _finite(2.0 * np.arctanh(p), "discovered")
