"""
KernelScript Models

A program is a list of single assignments followed by `return <ident>`.
Expressions are trees of Num, Var, BinOp and Call nodes; the only free
input is `L`, the (rows, degree) array of incoming messages.
"""

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Union

INPUT_NAME = "L"
MAX_STATEMENTS = 64
MAX_EXPR_DEPTH = 96
MAX_EXPR_NODES = 512

UNARY_FUNCTIONS = ("tanh", "atanh", "log", "exp", "abs", "sgn", "neg")
BINARY_FUNCTIONS = ("min", "max")
EXCL_REDUCTIONS = ("sum_excl", "prod_excl", "min_excl", "signprod_excl")
ALL_REDUCTIONS = ("sum_all", "prod_all", "min_all", "signprod_all")

# name -> arity
FUNCTIONS: dict[str, int] = {
    **{name: 1 for name in UNARY_FUNCTIONS},
    **{name: 2 for name in BINARY_FUNCTIONS},
    "clamp": 3,
    **{name: 1 for name in EXCL_REDUCTIONS + ALL_REDUCTIONS},
}

BINARY_OPERATORS = ("+", "-", "*", "/")


class FaultKind(str, Enum):
    TIMEOUT = "timeout"
    OP_BUDGET = "op_budget"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, BinOp, Call]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class KernelProgram:
    """
    A validated candidate CNU heuristic.

    `source` is always the normalized text, so `content_hash` identifies
    the program by its syntax tree.
    """
    source: str
    statements: tuple[Assign, ...]
    result: str
    parent_hashes: tuple[str, ...] = ()
    generation: int = 0
    content_hash: str = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "content_hash", source_hash(self.source))

    @property
    def length(self) -> int:
        return len(self.source)

    def with_lineage(self, parent_hashes: tuple[str, ...], generation: int) -> "KernelProgram":
        return KernelProgram(
            source=self.source,
            statements=self.statements,
            result=self.result,
            parent_hashes=parent_hashes,
            generation=generation,
        )


def source_hash(normalized: str) -> str:
    """Lowercase hex SHA-256 of the normalized UTF-8 source."""
    return hashlib.sha256(normalized.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EvalBudget:
    """Resource limits of a candidate evaluation."""
    max_scalar_ops: int = 10_000_000     # per decode call
    wall_clock_ms: int = 5000            # per candidate evaluation

    def __post_init__(self) -> None:
        if self.max_scalar_ops <= 0 or self.wall_clock_ms <= 0:
            raise ValueError("EvalBudget limits must be positive")
