"""
KernelScript Parser and Serializer

Each line is parsed with the host `ast` module and converted into the
KernelScript node types; anything outside the whitelist is rejected
before a program object exists.

    program := { ident "=" expr NEWLINE } "return" ident
"""

import ast
import math
import re
from typing import Iterable

from .errors import KernelSyntaxError, ValidationError
from .models import (
    FUNCTIONS,
    INPUT_NAME,
    MAX_EXPR_DEPTH,
    MAX_EXPR_NODES,
    MAX_STATEMENTS,
    Assign,
    BinOp,
    Call,
    Expr,
    KernelProgram,
    Num,
    Var,
)

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_RETURN = re.compile(r"^return\b(.*)$")
_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.DOTALL)

_AST_OPERATORS: dict[type, str] = {
    ast.Add: "+",
    ast.Sub: "-",
    ast.Mult: "*",
    ast.Div: "/",
}

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}
_ATOM = 3


# =============================================================================
# Parsing
# =============================================================================


def parse(source: str) -> KernelProgram:
    """Parse and validate KernelScript source into a KernelProgram."""
    statements: list[Assign] = []
    defined = {INPUT_NAME}
    result: str | None = None

    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if result is not None:
            raise KernelSyntaxError("Statement after return", lineno, 0)

        match = _RETURN.match(line)
        if match:
            name = match.group(1).strip()
            if not _IDENT.match(name):
                raise KernelSyntaxError("return must name a single variable", lineno, 7)
            if name not in defined:
                raise ValidationError(f"return of undefined name {name!r}", lineno)
            result = name
            continue

        statement = _parse_assignment(line, lineno, defined)
        statements.append(statement)
        defined.add(statement.target)
        if len(statements) > MAX_STATEMENTS:
            raise ValidationError(f"More than {MAX_STATEMENTS} statements", lineno)

    if result is None:
        raise KernelSyntaxError("Missing return statement")

    return KernelProgram(
        source=_render(statements, result),
        statements=tuple(statements),
        result=result,
    )


def _parse_assignment(line: str, lineno: int, defined: set[str]) -> Assign:
    try:
        tree = ast.parse(line, mode="exec")
    except SyntaxError as e:
        raise KernelSyntaxError(e.msg or "invalid syntax", lineno, e.offset) from e
    except (ValueError, RecursionError, MemoryError) as e:
        # null bytes and pathological nesting
        raise KernelSyntaxError(str(e) or type(e).__name__, lineno, 0) from e

    if len(tree.body) != 1 or not isinstance(tree.body[0], ast.Assign):
        raise ValidationError("Only single assignments and a final return are allowed", lineno)
    node = tree.body[0]
    if len(node.targets) != 1 or not isinstance(node.targets[0], ast.Name):
        raise ValidationError("Assignment target must be a single name", lineno)

    target = node.targets[0].id
    if target == INPUT_NAME:
        raise ValidationError(f"The input {INPUT_NAME!r} cannot be reassigned", lineno)
    _check_size(node.value, lineno)
    try:
        expr = _convert(node.value, lineno, defined)
    except RecursionError as e:
        raise ValidationError("Expression nested too deeply", lineno) from e
    return Assign(target=target, expr=expr)


def _check_size(root: ast.AST, lineno: int) -> None:
    """Bound depth and node count iteratively, before any recursive walk."""
    nodes = 0
    stack: list[tuple[ast.AST, int]] = [(root, 1)]
    while stack:
        node, depth = stack.pop()
        nodes += 1
        if depth > MAX_EXPR_DEPTH:
            raise ValidationError(f"Expression deeper than {MAX_EXPR_DEPTH}", lineno)
        if nodes > MAX_EXPR_NODES:
            raise ValidationError(f"Expression larger than {MAX_EXPR_NODES} nodes", lineno)
        if isinstance(node, ast.BinOp):
            stack.append((node.left, depth + 1))
            stack.append((node.right, depth + 1))
        elif isinstance(node, ast.UnaryOp):
            stack.append((node.operand, depth + 1))
        elif isinstance(node, ast.Call):
            stack.extend((arg, depth + 1) for arg in node.args)


def _convert(node: ast.AST, lineno: int, defined: set[str]) -> Expr:
    if isinstance(node, ast.Constant):
        if type(node.value) not in (int, float):
            raise ValidationError(f"Unsupported literal {node.value!r}", lineno)
        try:
            value = float(node.value)
        except OverflowError:
            value = math.inf
        if not math.isfinite(value):
            raise ValidationError("Literals must be finite", lineno)
        return Num(value)

    if isinstance(node, ast.Name):
        if node.id not in defined:
            raise ValidationError(f"Unknown identifier {node.id!r}", lineno)
        return Var(node.id)

    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.UAdd):
            return _convert(node.operand, lineno, defined)
        if isinstance(node.op, ast.USub):
            inner = _convert(node.operand, lineno, defined)
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Call("neg", (inner,))
        raise ValidationError(f"Operator {type(node.op).__name__} is not allowed", lineno)

    if isinstance(node, ast.BinOp):
        op = _AST_OPERATORS.get(type(node.op))
        if op is None:
            raise ValidationError(f"Operator {type(node.op).__name__} is not allowed", lineno)
        return BinOp(
            op,
            _convert(node.left, lineno, defined),
            _convert(node.right, lineno, defined),
        )

    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name):
            raise ValidationError("Only whitelisted operations may be called", lineno)
        name = node.func.id
        if name not in FUNCTIONS:
            raise ValidationError(f"Unknown operation {name}", lineno)
        if node.keywords:
            raise ValidationError(f"{name} takes no keyword arguments", lineno)
        if len(node.args) != FUNCTIONS[name]:
            raise ValidationError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(node.args)}", lineno
            )
        return Call(name, tuple(_convert(arg, lineno, defined) for arg in node.args))

    raise ValidationError(f"Construct {type(node).__name__} is not allowed", lineno)


def extract_source(text: str) -> str:
    """Program text from a mutator response, unwrapping a fenced code block."""
    match = _FENCE.search(text)
    return match.group(1) if match else text


# =============================================================================
# Serialization
# =============================================================================


def format_number(value: float) -> str:
    """Shortest round-trip decimal; integral values print without a point."""
    if value == 0:
        return "0"
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _precedence(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    return _ATOM


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(format_expr(arg) for arg in expr.args)})"

    own = _PRECEDENCE[expr.op]
    left = format_expr(expr.left)
    right = format_expr(expr.right)
    if _precedence(expr.left) < own:
        left = f"({left})"
    if _precedence(expr.right) <= own:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def _render(statements: Iterable[Assign], result: str) -> str:
    lines = [f"{s.target} = {format_expr(s.expr)}" for s in statements]
    lines.append(f"return {result}")
    return "\n".join(lines)


def serialize(program: KernelProgram) -> str:
    """Canonical text of a program."""
    return _render(program.statements, program.result)


def normalize(source: str) -> str:
    """Canonical text of a source string (parses and validates it)."""
    return parse(source).source


def build_program(
    statements: Iterable[Assign],
    result: str,
    parent_hashes: tuple[str, ...] = (),
    generation: int = 0,
) -> KernelProgram:
    """Re-validate a statement list by a serialize/parse round trip."""
    program = parse(_render(statements, result))
    return program.with_lineage(parent_hashes, generation)
