"""
KernelScript: the sandboxed, loop-free language candidate CNU kernels are
written in, with its parser, interpreter and mutation operators.
"""

from .errors import KernelSyntaxError, SandboxFault, ValidationError
from .interpreter import OpMeter, ScriptKernel, interpret, run_program
from .models import (
    FUNCTIONS,
    INPUT_NAME,
    MAX_EXPR_DEPTH,
    MAX_EXPR_NODES,
    MAX_STATEMENTS,
    Assign,
    BinOp,
    Call,
    EvalBudget,
    FaultKind,
    KernelProgram,
    Num,
    Var,
    source_hash,
)
from .mutation import OPERATORS, MutationPolicy, mutate
from .parser import build_program, extract_source, format_number, normalize, parse, serialize
from .seeds import (
    boxplus_phi_source,
    boxplus_source,
    discovered_source,
    min_sum_source,
    offset_min_sum_source,
    seed_program,
    seed_source,
)

__all__ = [
    "KernelSyntaxError",
    "SandboxFault",
    "ValidationError",
    "OpMeter",
    "ScriptKernel",
    "interpret",
    "run_program",
    "FUNCTIONS",
    "INPUT_NAME",
    "MAX_EXPR_DEPTH",
    "MAX_EXPR_NODES",
    "MAX_STATEMENTS",
    "Assign",
    "BinOp",
    "Call",
    "EvalBudget",
    "FaultKind",
    "KernelProgram",
    "Num",
    "Var",
    "source_hash",
    "OPERATORS",
    "MutationPolicy",
    "mutate",
    "build_program",
    "extract_source",
    "format_number",
    "normalize",
    "parse",
    "serialize",
    "boxplus_phi_source",
    "boxplus_source",
    "discovered_source",
    "min_sum_source",
    "offset_min_sum_source",
    "seed_program",
    "seed_source",
]
