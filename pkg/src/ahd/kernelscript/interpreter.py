"""
KernelScript Interpreter

Evaluates a program over every check-node row at once with numpy.
Intermediate values follow IEEE semantics (warnings suppressed); only a
non-finite final output faults. Every operator node charges one scalar
op per output element against the budget, and the wall-clock deadline is
checked after each statement.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ahd.kernels import CnuKernel, check_input
from ahd.kernels.native import exclusive_min, exclusive_prod, exclusive_sum, sign

from .errors import SandboxFault
from .models import BinOp, Call, EvalBudget, Expr, FaultKind, KernelProgram, Num, Var, INPUT_NAME

ArrayFn = Callable[..., np.ndarray]


def _row_all(reduce: ArrayFn) -> ArrayFn:
    def apply(x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(reduce(x, axis=-1, keepdims=True), x.shape)
    return apply


def _signprod_all(x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.prod(sign(x), axis=-1, keepdims=True), x.shape)


def _clamp(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(x, lo), hi)


_UNARY: dict[str, ArrayFn] = {
    "tanh": np.tanh,
    "atanh": np.arctanh,
    "log": np.log,
    "exp": np.exp,
    "abs": np.abs,
    "sgn": sign,
    "neg": np.negative,
}

_REDUCTIONS: dict[str, ArrayFn] = {
    "sum_excl": exclusive_sum,
    "prod_excl": exclusive_prod,
    "min_excl": exclusive_min,
    "signprod_excl": lambda x: exclusive_prod(sign(x)),
    "sum_all": _row_all(np.sum),
    "prod_all": _row_all(np.prod),
    "min_all": _row_all(np.min),
    "signprod_all": _signprod_all,
}

_BINARY: dict[str, ArrayFn] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "min": np.minimum,
    "max": np.maximum,
}


@dataclass
class OpMeter:
    """Scalar-op counter and wall-clock deadline shared by the calls of one evaluation."""
    budget: EvalBudget = field(default_factory=EvalBudget)
    ops: int = 0
    deadline: Optional[float] = None

    def start_clock(self) -> None:
        self.deadline = time.monotonic() + self.budget.wall_clock_ms / 1000.0

    def reset_ops(self) -> None:
        self.ops = 0

    def charge(self, elements: int) -> None:
        self.ops += elements
        if self.ops > self.budget.max_scalar_ops:
            raise SandboxFault(
                FaultKind.OP_BUDGET,
                f"{self.ops} scalar ops exceed budget {self.budget.max_scalar_ops}",
            )

    def check_clock(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SandboxFault(
                FaultKind.TIMEOUT, f"exceeded {self.budget.wall_clock_ms} ms wall clock"
            )


def _evaluate(expr: Expr, env: dict[str, np.ndarray], shape: tuple[int, ...], meter: OpMeter) -> np.ndarray:
    if isinstance(expr, Num):
        return np.full(shape, expr.value)
    if isinstance(expr, Var):
        return env[expr.name]

    if isinstance(expr, BinOp):
        left = _evaluate(expr.left, env, shape, meter)
        right = _evaluate(expr.right, env, shape, meter)
        meter.charge(left.size)
        return _BINARY[expr.op](left, right)

    args = [_evaluate(arg, env, shape, meter) for arg in expr.args]
    meter.charge(args[0].size)
    if expr.func in _UNARY:
        return _UNARY[expr.func](args[0])
    if expr.func in _REDUCTIONS:
        return _REDUCTIONS[expr.func](args[0])
    if expr.func == "clamp":
        return _clamp(*args)
    return _BINARY[expr.func](*args)


def run_program(program: KernelProgram, rows: np.ndarray, meter: OpMeter) -> np.ndarray:
    """Evaluate `program` on a (rows, degree) input against an existing meter."""
    rows = check_input(rows)
    env: dict[str, np.ndarray] = {INPUT_NAME: rows}
    with np.errstate(all="ignore"):
        for statement in program.statements:
            env[statement.target] = _evaluate(statement.expr, env, rows.shape, meter)
            meter.check_clock()
    out = np.array(env[program.result], dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise SandboxFault(FaultKind.NUMERIC, "non-finite output")
    return out


def interpret(
    program: KernelProgram,
    rows: np.ndarray,
    budget: Optional[EvalBudget] = None,
) -> np.ndarray:
    """One self-contained evaluation with a fresh meter and deadline."""
    meter = OpMeter(budget or EvalBudget())
    meter.start_clock()
    return run_program(program, rows, meter)


class ScriptKernel(CnuKernel):
    """A KernelScript program used as a decoder CNU."""

    def __init__(
        self,
        program: KernelProgram,
        budget: Optional[EvalBudget] = None,
        name: Optional[str] = None,
    ):
        self.program = program
        self.name = name or f"script:{program.content_hash[:12]}"
        self.meter = OpMeter(budget or EvalBudget())

    def begin_evaluation(self) -> None:
        self.meter.start_clock()

    def begin_decode(self) -> None:
        self.meter.reset_ops()

    def __call__(self, rows: np.ndarray) -> np.ndarray:
        return run_program(self.program, rows, self.meter)
