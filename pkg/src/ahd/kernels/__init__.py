"""CNU kernels and the kernel registry."""

from .errors import NumericFault, UnknownKernel
from .models import CnuInput, CnuKernel, KernelParams, NativeKernel, check_input
from .native import (
    boxplus,
    boxplus_phi,
    discovered,
    exclusive_min,
    exclusive_prod,
    exclusive_sum,
    min_sum,
    offset_min_sum,
    phi,
    sign,
)
from .registry import NATIVE_KERNELS, SCRIPT_PREFIX, get_kernel, kernel_names

__all__ = [
    "CnuInput",
    "CnuKernel",
    "KernelParams",
    "NativeKernel",
    "check_input",
    "NumericFault",
    "UnknownKernel",
    "boxplus",
    "boxplus_phi",
    "discovered",
    "min_sum",
    "offset_min_sum",
    "phi",
    "sign",
    "exclusive_min",
    "exclusive_prod",
    "exclusive_sum",
    "NATIVE_KERNELS",
    "SCRIPT_PREFIX",
    "get_kernel",
    "kernel_names",
]
