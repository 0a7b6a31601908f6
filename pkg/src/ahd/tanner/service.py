"""
Tanner Service

Code construction, systematic encoding, syndromes and the line-oriented
code spec file format:

    qcldpc <rows> <cols> <Z> <info_cols>
    <shift> <shift> - ...        (one line per base row, '-' for null)
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Union

import numpy as np

from .errors import EncodeSingular, InvalidSpec, LengthMismatch
from .models import CodeSpec, Shift, TannerGraph

logger = logging.getLogger(__name__)

SPEC_HEADER = "qcldpc"
DATA_DIR = Path(__file__).resolve().parent.parent / "data"


# =============================================================================
# Spec file format
# =============================================================================


def parse_spec(text: str) -> CodeSpec:
    """Parse a code spec file. Blank lines and '#' comments are ignored."""
    lines = [
        line.strip() for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
    if not lines:
        raise InvalidSpec("Empty code spec")

    header = lines[0].split()
    if len(header) != 5 or header[0] != SPEC_HEADER:
        raise InvalidSpec(f"Bad header: {lines[0]!r}")
    try:
        rows, cols, lift, info_cols = (int(tok) for tok in header[1:])
    except ValueError as e:
        raise InvalidSpec(f"Bad header: {lines[0]!r}") from e

    body = lines[1:]
    if len(body) != rows:
        raise InvalidSpec(f"Expected {rows} shift rows, got {len(body)}")

    shifts: list[tuple[Shift, ...]] = []
    for idx, line in enumerate(body):
        tokens = line.split()
        if len(tokens) != cols:
            raise InvalidSpec(f"Row {idx} has {len(tokens)} entries, expected {cols}")
        row: list[Shift] = []
        for tok in tokens:
            if tok == "-":
                row.append(None)
            else:
                try:
                    row.append(int(tok))
                except ValueError as e:
                    raise InvalidSpec(f"Bad shift {tok!r} in row {idx}") from e
        shifts.append(tuple(row))

    spec = CodeSpec(
        base_rows=rows,
        base_cols=cols,
        lift_size=lift,
        shifts=tuple(shifts),
        info_cols=info_cols,
    )
    validate_spec(spec)
    return spec


def serialize_spec(spec: CodeSpec) -> str:
    """Serialize a spec to its canonical text form."""
    lines = [f"{SPEC_HEADER} {spec.base_rows} {spec.base_cols} {spec.lift_size} {spec.info_cols}"]
    for row in spec.shifts:
        lines.append(" ".join("-" if s is None else str(s) for s in row))
    return "\n".join(lines) + "\n"


def load_spec(path: Union[str, Path]) -> CodeSpec:
    """Load a spec file from disk."""
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def default_spec_path(lift_size: int = 16) -> Path:
    """Path of a shipped desk-scale spec (4x8 base, rate 1/2)."""
    return DATA_DIR / "codes" / f"qc_4x8_z{lift_size}.txt"


# =============================================================================
# Validation
# =============================================================================


def validate_spec(spec: CodeSpec) -> None:
    """Check the structural invariants of a spec."""
    if spec.base_rows < 1 or spec.base_cols <= spec.base_rows or spec.lift_size < 1:
        raise InvalidSpec("Base matrix must be rows < cols with positive lift size")
    if spec.info_cols != spec.base_cols - spec.base_rows:
        raise InvalidSpec(
            f"info_cols must equal cols - rows ({spec.base_cols - spec.base_rows}), "
            f"got {spec.info_cols}"
        )
    if len(spec.shifts) != spec.base_rows or any(len(r) != spec.base_cols for r in spec.shifts):
        raise InvalidSpec("Shift matrix shape does not match header")
    for r, row in enumerate(spec.shifts):
        for c, s in enumerate(row):
            if s is not None and not 0 <= s < spec.lift_size:
                raise InvalidSpec(f"Shift {s} at ({r}, {c}) outside [0, {spec.lift_size})")
        if spec.row_degree(r) < 2:
            raise InvalidSpec(f"Base row {r} has check degree < 2")


def is_staircase(spec: CodeSpec) -> bool:
    """
    True when the parity part is block lower-bidiagonal: parity column j
    is non-null exactly at base rows j and j+1 (the last column at its
    own row only).
    """
    kb = spec.info_cols
    for i in range(spec.base_rows):
        for j in range(spec.parity_cols):
            present = spec.shifts[i][kb + j] is not None
            expected = i == j or i == j + 1
            if present != expected:
                return False
    return True


# =============================================================================
# Construction
# =============================================================================


def build_code(spec: CodeSpec) -> TannerGraph:
    """
    Expand a CodeSpec into its Tanner graph.

    Every non-null circulant contributes Z edges; check r*Z+z of base
    column c connects to variable c*Z + (z + shift) mod Z.
    """
    validate_spec(spec)
    if not is_staircase(spec) and _parity_inverse(spec) is None:
        raise InvalidSpec("Parity part is singular; spec cannot be encoded")

    lift = spec.lift_size
    z = np.arange(lift, dtype=np.int64)
    edge_check: list[np.ndarray] = []
    edge_var: list[np.ndarray] = []
    row_groups: list[np.ndarray] = []

    offset = 0
    for r, row in enumerate(spec.shifts):
        cols = [(c, s) for c, s in enumerate(row) if s is not None]
        for c, s in cols:
            edge_check.append(r * lift + z)
            edge_var.append(c * lift + (z + s) % lift)
        degree = len(cols)
        # edge (r, k-th column, z) sits at offset + k*Z + z
        group = offset + np.arange(degree, dtype=np.int64)[None, :] * lift + z[:, None]
        group.setflags(write=False)
        row_groups.append(group)
        offset += degree * lift

    checks = np.concatenate(edge_check)
    variables = np.concatenate(edge_var)
    order = np.argsort(checks, kind="stable")
    counts = np.bincount(checks, minlength=spec.m)
    check_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    for arr in (checks, variables, order, check_ptr):
        arr.setflags(write=False)

    graph = TannerGraph(
        spec=spec,
        n_vars=spec.n,
        n_checks=spec.m,
        edge_check=checks,
        edge_var=variables,
        check_ptr=check_ptr,
        check_edges=order,
        row_groups=tuple(row_groups),
    )
    logger.debug(
        "Built Tanner graph",
        extra={"extra_data": {"n": spec.n, "k": spec.k, "edges": graph.n_edges}},
    )
    return graph


def expand_dense(spec: CodeSpec) -> np.ndarray:
    """Dense 0/1 parity-check matrix obtained by expanding each circulant."""
    lift = spec.lift_size
    h = np.zeros((spec.m, spec.n), dtype=np.uint8)
    eye = np.eye(lift, dtype=np.uint8)
    for r, row in enumerate(spec.shifts):
        for c, s in enumerate(row):
            if s is None:
                continue
            # row z has its one at column (z + s) mod Z
            h[r * lift:(r + 1) * lift, c * lift:(c + 1) * lift] = np.roll(eye, s, axis=1)
    return h


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) by Gaussian elimination."""
    a = (np.asarray(matrix) & 1).astype(np.uint8).copy()
    rows, cols = a.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivots = np.nonzero(a[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot = rank + pivots[0]
        if pivot != rank:
            a[[rank, pivot]] = a[[pivot, rank]]
        mask = a[:, col].astype(bool)
        mask[rank] = False
        a[mask] ^= a[rank]
        rank += 1
    return rank


def gf2_inverse(matrix: np.ndarray) -> np.ndarray | None:
    """Inverse over GF(2) by Gauss-Jordan elimination, None if singular."""
    a = (np.asarray(matrix) & 1).astype(np.uint8)
    size = a.shape[0]
    aug = np.concatenate([a, np.eye(size, dtype=np.uint8)], axis=1)
    for col in range(size):
        pivots = np.nonzero(aug[col:, col])[0]
        if pivots.size == 0:
            return None
        pivot = col + pivots[0]
        if pivot != col:
            aug[[col, pivot]] = aug[[pivot, col]]
        mask = aug[:, col].astype(bool)
        mask[col] = False
        aug[mask] ^= aug[col]
    return aug[:, size:].copy()


@lru_cache(maxsize=32)
def _parity_inverse(spec: CodeSpec) -> np.ndarray | None:
    h = expand_dense(spec)
    return gf2_inverse(h[:, spec.k:])


# =============================================================================
# Encoding and syndromes
# =============================================================================


def _as_bits(bits: np.ndarray) -> np.ndarray:
    return (np.asarray(bits).astype(np.int64) & 1).astype(np.uint8)


def encode(graph: TannerGraph, info_bits: np.ndarray) -> np.ndarray:
    """
    Systematic encoding: codeword = info_bits followed by parity.

    Staircase parity parts are solved block by block; any other
    invertible parity part falls back to a dense GF(2) inverse.
    """
    spec = graph.spec
    s = _as_bits(info_bits)
    if s.shape != (spec.k,):
        raise LengthMismatch(f"Expected {spec.k} info bits, got {s.shape}")

    info_mask = graph.edge_var < spec.k
    lam = np.bincount(
        graph.edge_check[info_mask],
        weights=s[graph.edge_var[info_mask]],
        minlength=spec.m,
    ).astype(np.int64) & 1

    if is_staircase(spec):
        parity = _staircase_parity(spec, lam.astype(np.uint8))
    else:
        inverse = _parity_inverse(spec)
        if inverse is None:
            raise EncodeSingular("Parity part is singular")
        parity = ((inverse.astype(np.int64) @ lam) & 1).astype(np.uint8)

    return np.concatenate([s, parity])


def _staircase_parity(spec: CodeSpec, lam: np.ndarray) -> np.ndarray:
    lift = spec.lift_size
    kb = spec.info_cols
    blocks = lam.reshape(spec.base_rows, lift)
    parity = np.zeros((spec.parity_cols, lift), dtype=np.uint8)
    for i in range(spec.base_rows):
        rhs = blocks[i].copy()
        if i > 0:
            prev_shift = spec.shifts[i][kb + i - 1]
            rhs ^= np.roll(parity[i - 1], -prev_shift)
        own_shift = spec.shifts[i][kb + i]
        if own_shift is None:
            raise EncodeSingular(f"Missing diagonal block at base row {i}")
        parity[i] = np.roll(rhs, own_shift)
    return parity.reshape(-1)


def syndrome(graph: TannerGraph, hard_bits: np.ndarray) -> np.ndarray:
    """Per-check XOR of the adjacent hard bits."""
    bits = _as_bits(hard_bits)
    if bits.shape[-1] != graph.n_vars:
        raise LengthMismatch(f"Expected {graph.n_vars} bits, got {bits.shape[-1]}")
    if bits.ndim == 1:
        sums = np.bincount(graph.edge_check, weights=bits[graph.edge_var], minlength=graph.n_checks)
        return (sums.astype(np.int64) & 1).astype(np.uint8)
    return batch_syndrome(graph, bits)


def batch_syndrome(graph: TannerGraph, bits: np.ndarray) -> np.ndarray:
    """Syndromes of a (batch, N) array of hard decisions."""
    batch = bits.shape[0]
    flat = (np.arange(batch)[:, None] * graph.n_checks + graph.edge_check[None, :]).ravel()
    sums = np.bincount(flat, weights=bits[:, graph.edge_var].ravel(), minlength=batch * graph.n_checks)
    return (sums.astype(np.int64) & 1).astype(np.uint8).reshape(batch, graph.n_checks)
