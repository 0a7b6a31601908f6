"""Flooding belief-propagation decoder with pluggable check-node kernels."""

from .engine import clip_llrs, cnu_step, decode_batch, hard_decide, vnu_step
from .errors import KernelFault, LengthMismatch, NonFiniteInput, NonPositiveClip
from .models import DEFAULT_LLR_CLIP, DEFAULT_MAX_ITERS, DecodeReport, EdgeMessages, TbResult

__all__ = [
    "clip_llrs",
    "cnu_step",
    "decode_batch",
    "hard_decide",
    "vnu_step",
    "KernelFault",
    "LengthMismatch",
    "NonFiniteInput",
    "NonPositiveClip",
    "DEFAULT_LLR_CLIP",
    "DEFAULT_MAX_ITERS",
    "DecodeReport",
    "EdgeMessages",
    "TbResult",
]
