"""
KernelScript Mutation

Deterministic program mutations used by the mock mutator. Each operator
returns a new statement list or None when it does not apply; the chosen
child is re-validated by a serialize/parse round trip and, failing that,
the literal perturbation (and finally a clamp around the result) is used.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence, TypeVar, Union

import numpy as np

from ahd.errors import AhdError

from .models import (
    INPUT_NAME,
    MAX_STATEMENTS,
    Assign,
    BinOp,
    Call,
    Expr,
    KernelProgram,
    Num,
    Var,
)
from .parser import build_program, format_number

logger = logging.getLogger(__name__)

T = TypeVar("T")

Path = tuple[int, ...]
Statements = list[Assign]
Outcome = tuple[Statements, str, Optional[str]]
Operator = Callable[
    [Statements, str, np.random.Generator, "MutationPolicy", Sequence[KernelProgram]],
    Optional[Outcome],
]

OP_SWAPS = {"+": "-", "-": "+", "*": "/", "/": "*"}
CALL_SWAPS = {
    "min": "max",
    "max": "min",
    "sum_excl": "sum_all",
    "sum_all": "sum_excl",
    "prod_excl": "prod_all",
    "prod_all": "prod_excl",
    "min_excl": "min_all",
    "min_all": "min_excl",
    "signprod_excl": "signprod_all",
    "signprod_all": "signprod_excl",
}
REDUCTION_SWAPS = {k: v for k, v in CALL_SWAPS.items() if k not in ("min", "max")}


@dataclass(frozen=True)
class MutationPolicy:
    """Relative weights of the mutation operators and their constants."""
    weights: dict[str, float] = field(default_factory=lambda: {
        "perturb_literal": 0.4,
        "swap_operator": 0.2,
        "wrap_clamp": 0.1,
        "swap_reduction": 0.15,
        "splice": 0.15,
    })
    clamp_bound: float = 16.0
    literal_digits: int = 4


# =============================================================================
# Tree helpers
# =============================================================================


def _walk(expr: Expr, path: Path = ()) -> Iterator[tuple[Path, Expr]]:
    yield path, expr
    if isinstance(expr, BinOp):
        yield from _walk(expr.left, path + (0,))
        yield from _walk(expr.right, path + (1,))
    elif isinstance(expr, Call):
        for i, arg in enumerate(expr.args):
            yield from _walk(arg, path + (i,))


def _replace(expr: Expr, path: Path, new: Expr) -> Expr:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(expr, BinOp):
        if head == 0:
            return BinOp(expr.op, _replace(expr.left, rest, new), expr.right)
        return BinOp(expr.op, expr.left, _replace(expr.right, rest, new))
    if isinstance(expr, Call):
        args = list(expr.args)
        args[head] = _replace(args[head], rest, new)
        return Call(expr.func, tuple(args))
    raise ValueError("Path leads through a leaf")


def _nodes(statements: Statements, predicate: Callable[[Expr], bool]) -> list[tuple[int, Path, Expr]]:
    return [
        (i, path, node)
        for i, statement in enumerate(statements)
        for path, node in _walk(statement.expr)
        if predicate(node)
    ]


def _free_names(expr: Expr) -> set[str]:
    return {node.name for _, node in _walk(expr) if isinstance(node, Var)}


def _pick(rng: np.random.Generator, items: Sequence[T]) -> T:
    return items[int(rng.integers(len(items)))]


def _with(statements: Statements, index: int, path: Path, new: Expr) -> Statements:
    out = list(statements)
    out[index] = Assign(out[index].target, _replace(out[index].expr, path, new))
    return out


def _round(value: float, digits: int) -> float:
    return float(f"{value:.{digits}g}")


# =============================================================================
# Operators
# =============================================================================


def perturb_literal(
    statements: Statements,
    result: str,
    rng: np.random.Generator,
    policy: MutationPolicy,
    donors: Sequence[KernelProgram],
) -> Optional[Outcome]:
    """Scale a literal by U[0.5, 2] or shift it by U[-1, 1]."""
    literals = _nodes(statements, lambda n: isinstance(n, Num))
    if not literals:
        return None
    index, path, node = _pick(rng, literals)
    if rng.random() < 0.5:
        value = node.value * rng.uniform(0.5, 2.0)
    else:
        value = node.value + rng.uniform(-1.0, 1.0)
    value = _round(value, policy.literal_digits)
    if not np.isfinite(value) or format_number(value) == format_number(node.value):
        value = _round(node.value + (0.5 if node.value <= 0 else -0.5 * abs(node.value)), policy.literal_digits)
    return _with(statements, index, path, Num(value)), result, None


def swap_operator(
    statements: Statements,
    result: str,
    rng: np.random.Generator,
    policy: MutationPolicy,
    donors: Sequence[KernelProgram],
) -> Optional[Outcome]:
    """+ <-> -, * <-> /, min <-> max."""
    candidates = _nodes(
        statements,
        lambda n: isinstance(n, BinOp) or (isinstance(n, Call) and n.func in ("min", "max")),
    )
    if not candidates:
        return None
    index, path, node = _pick(rng, candidates)
    if isinstance(node, BinOp):
        new: Expr = BinOp(OP_SWAPS[node.op], node.left, node.right)
    else:
        new = Call(CALL_SWAPS[node.func], node.args)
    return _with(statements, index, path, new), result, None


def wrap_clamp(
    statements: Statements,
    result: str,
    rng: np.random.Generator,
    policy: MutationPolicy,
    donors: Sequence[KernelProgram],
) -> Optional[Outcome]:
    """Wrap a non-literal subexpression in clamp(x, -c, c)."""
    candidates = _nodes(statements, lambda n: not isinstance(n, Num))
    if not candidates:
        return None
    index, path, node = _pick(rng, candidates)
    bound = _round(policy.clamp_bound * rng.uniform(0.5, 1.0), policy.literal_digits)
    return _with(statements, index, path, Call("clamp", (node, Num(-bound), Num(bound)))), result, None


def swap_reduction(
    statements: Statements,
    result: str,
    rng: np.random.Generator,
    policy: MutationPolicy,
    donors: Sequence[KernelProgram],
) -> Optional[Outcome]:
    """Replace a row reduction with its leave-one-out or full-row sibling."""
    candidates = _nodes(statements, lambda n: isinstance(n, Call) and n.func in REDUCTION_SWAPS)
    if not candidates:
        return None
    index, path, node = _pick(rng, candidates)
    return _with(statements, index, path, Call(REDUCTION_SWAPS[node.func], node.args)), result, None


def splice(
    statements: Statements,
    result: str,
    rng: np.random.Generator,
    policy: MutationPolicy,
    donors: Sequence[KernelProgram],
) -> Optional[Outcome]:
    """
    Replace the expression of one statement with a donor statement's
    expression whose free names are already defined at that point.
    """
    options: list[tuple[int, Expr, str]] = []
    for donor in donors:
        for donor_statement in donor.statements:
            needed = _free_names(donor_statement.expr)
            defined = {INPUT_NAME}
            for i, statement in enumerate(statements):
                if needed <= defined and donor_statement.expr != statement.expr:
                    options.append((i, donor_statement.expr, donor.content_hash))
                defined.add(statement.target)
    if not options:
        return None
    index, expr, donor_hash = _pick(rng, options)
    out = list(statements)
    out[index] = Assign(out[index].target, expr)
    return out, result, donor_hash


def clamp_result(
    statements: Statements,
    result: str,
    rng: np.random.Generator,
    policy: MutationPolicy,
    donors: Sequence[KernelProgram],
) -> Optional[Outcome]:
    """Always applicable: clamp the returned value."""
    bound = policy.clamp_bound
    wrapped = Call("clamp", (Var(result), Num(-bound), Num(bound)))
    if len(statements) < MAX_STATEMENTS:
        taken = {s.target for s in statements}
        name = next(f"c{i}" for i in range(len(statements) + 2) if f"c{i}" not in taken)
        return list(statements) + [Assign(name, wrapped)], name, None
    last = statements[-1]
    expr = Call("clamp", (last.expr, Num(-bound), Num(bound)))
    return list(statements[:-1]) + [Assign(last.target, expr)], result, None


OPERATORS: dict[str, Operator] = {
    "perturb_literal": perturb_literal,
    "swap_operator": swap_operator,
    "wrap_clamp": wrap_clamp,
    "swap_reduction": swap_reduction,
    "splice": splice,
}


# =============================================================================
# Entry point
# =============================================================================


def mutate(
    program: KernelProgram,
    rng_seed: Union[int, Sequence[int], np.random.Generator],
    policy: Optional[MutationPolicy] = None,
    donors: Sequence[KernelProgram] = (),
) -> KernelProgram:
    """
    Produce one valid child of `program`. Deterministic given the seed,
    the policy and the donors.
    """
    policy = policy or MutationPolicy()
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)

    names = sorted(policy.weights)
    weights = np.array([policy.weights[n] for n in names], dtype=np.float64)
    chosen = names[int(rng.choice(len(names), p=weights / weights.sum()))]

    statements = list(program.statements)
    for operator_name in (chosen, "perturb_literal", "clamp_result"):
        operator = OPERATORS.get(operator_name, clamp_result)
        outcome = operator(statements, program.result, rng, policy, donors)
        if outcome is None:
            continue
        new_statements, result, donor_hash = outcome
        parents = (program.content_hash,) + ((donor_hash,) if donor_hash else ())
        try:
            return build_program(new_statements, result, parents, program.generation + 1)
        except AhdError as e:
            logger.debug("Mutation %s produced an invalid child: %s", operator_name, e)

    # clamp_result always re-validates for a valid parent
    raise AssertionError("unreachable")
