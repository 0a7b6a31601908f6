"""
Kernel Registry

Resolves kernel names used by the CLI and the evaluator config:
"boxplus", "boxplus-phi", "min-sum", "offset-min-sum", "discovered" and
"script:<id>" for a KernelScript program.
"""

from pathlib import Path
from typing import Callable, Optional, Union

from .errors import UnknownKernel
from .models import CnuKernel, KernelFn, KernelParams, NativeKernel
from .native import boxplus, boxplus_phi, discovered, min_sum, offset_min_sum

SCRIPT_PREFIX = "script:"

NATIVE_KERNELS: dict[str, KernelFn] = {
    "boxplus": boxplus,
    "boxplus-phi": boxplus_phi,
    "min-sum": min_sum,
    "offset-min-sum": offset_min_sum,
    "discovered": discovered,
}

ScriptResolver = Callable[[str], str]


def kernel_names() -> list[str]:
    return list(NATIVE_KERNELS)


def get_kernel(
    name: str,
    params: Optional[KernelParams] = None,
    *,
    scripts: Optional[ScriptResolver] = None,
) -> CnuKernel:
    """
    Build a kernel by name.

    `script:<id>` resolves <id> through `scripts` (id -> source text);
    without a resolver <id> is read as a program file path.
    """
    if name in NATIVE_KERNELS:
        return NativeKernel(name=name, fn=NATIVE_KERNELS[name], params=params or KernelParams())

    if name.startswith(SCRIPT_PREFIX):
        from ahd.kernelscript import ScriptKernel, parse

        ident = name[len(SCRIPT_PREFIX):]
        try:
            source = scripts(ident) if scripts else _read_program(ident)
        except (KeyError, OSError) as e:
            raise UnknownKernel(f"No program found for {name!r}") from e
        return ScriptKernel(parse(source), name=name)

    raise UnknownKernel(f"Unknown kernel {name!r}; known: {', '.join(kernel_names())}")


def _read_program(path: Union[str, Path]) -> str:
    return Path(path).read_text(encoding="utf-8")
