"""
Tanner Models

Quasi-cyclic parity-check structure and its expanded bipartite graph.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

Shift = Optional[int]


@dataclass(frozen=True)
class CodeSpec:
    """
    Base matrix of circulant shifts for a QC-LDPC code.

    Each entry is a cyclic shift in [0, Z) or None for an all-zero block.
    The first `info_cols` base columns carry the systematic message, the
    remaining columns are parity.
    """
    base_rows: int
    base_cols: int
    lift_size: int
    shifts: tuple[tuple[Shift, ...], ...]
    info_cols: int

    @property
    def k(self) -> int:
        """Info bits per code block."""
        return self.info_cols * self.lift_size

    @property
    def n(self) -> int:
        """Codeword length."""
        return self.base_cols * self.lift_size

    @property
    def m(self) -> int:
        """Number of parity checks."""
        return self.base_rows * self.lift_size

    @property
    def parity_cols(self) -> int:
        return self.base_cols - self.info_cols

    @property
    def rate(self) -> float:
        return self.info_cols / self.base_cols

    def nonnull_count(self) -> int:
        return sum(1 for row in self.shifts for s in row if s is not None)

    def row_degree(self, row: int) -> int:
        return sum(1 for s in self.shifts[row] if s is not None)


@dataclass(frozen=True)
class TannerGraph:
    """
    Expanded message-passing graph of a CodeSpec.

    Edges are stored in canonical order: row-major over the base matrix,
    then by lift index. `row_groups[r]` holds the edge indices of every
    check in base row r as a (Z, degree) array, one row per check node,
    columns in base-column order.
    """
    spec: CodeSpec
    n_vars: int
    n_checks: int
    edge_check: np.ndarray
    edge_var: np.ndarray
    check_ptr: np.ndarray
    check_edges: np.ndarray
    row_groups: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n_edges(self) -> int:
        return int(self.edge_check.shape[0])

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def n(self) -> int:
        return self.spec.n

    def check_neighbors(self, check: int) -> np.ndarray:
        """Variable indices adjacent to a check node."""
        edges = self.check_edges[self.check_ptr[check]:self.check_ptr[check + 1]]
        return self.edge_var[edges]

    def var_checks(self, var: int) -> np.ndarray:
        """Check indices adjacent to a variable node."""
        return self.edge_check[self.edge_var == var]

    def adjacency_bytes(self) -> bytes:
        """Serialization of the edge list used for determinism checks."""
        pairs = np.stack([self.edge_check, self.edge_var], axis=1).astype("<i8")
        return pairs.tobytes()
