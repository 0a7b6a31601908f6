"""
Kernel Models

Check-node update kernels share one calling convention: they take a
CnuInput, a (rows, degree) array holding, for each check node, the
incoming variable-to-check messages in edge order, and return an array of
the same shape with the outgoing check-to-variable message of each edge.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

CnuInput = np.ndarray
KernelFn = Callable[[np.ndarray, "KernelParams"], np.ndarray]


@dataclass(frozen=True)
class KernelParams:
    """Offset and numerical-stability constants shared by the kernels."""
    beta: float = 0.5
    phi_clip_lo: float = 8.5e-8
    phi_clip_hi: float = 16.6
    atanh_clip: float = 1.0 - 1e-7
    log_eps: float = 1e-12

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.phi_clip_lo < self.phi_clip_hi:
            raise ValueError("phi_clip_lo must be below phi_clip_hi")
        if not 0 < self.atanh_clip < 1:
            raise ValueError("atanh_clip must lie in (0, 1)")
        if not self.log_eps > 0:
            raise ValueError("log_eps must be positive")


def check_input(rows: np.ndarray) -> np.ndarray:
    """Validate a CnuInput."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] < 2:
        raise ValueError(f"CnuInput must be (rows, degree>=2), got shape {rows.shape}")
    return rows


class CnuKernel:
    """
    Callable check-node update.

    `begin_evaluation` is called once per candidate evaluation and
    `begin_decode` once per decode_batch call, so budgeted kernels can
    reset their meters.
    """

    name: str

    def begin_evaluation(self) -> None:
        pass

    def begin_decode(self) -> None:
        pass

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass
class NativeKernel(CnuKernel):
    """A built-in kernel bound to its parameters."""
    name: str
    fn: KernelFn
    params: KernelParams = field(default_factory=KernelParams)

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        return self.fn(rows, self.params)
