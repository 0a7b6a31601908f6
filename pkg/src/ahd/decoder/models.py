"""
Decoder Models
"""

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

DEFAULT_MAX_ITERS = 50
DEFAULT_LLR_CLIP = 16.0


@dataclass
class EdgeMessages:
    """
    Variable-to-check and check-to-variable messages of a batch of code
    blocks, shape (blocks, edges) in canonical edge order.
    """
    v2c: np.ndarray
    c2v: np.ndarray

    @classmethod
    def initial(cls, channel_edges: np.ndarray) -> "EdgeMessages":
        return cls(v2c=channel_edges.copy(), c2v=np.zeros_like(channel_edges))

    def select(self, rows: np.ndarray) -> "EdgeMessages":
        return EdgeMessages(v2c=self.v2c[rows], c2v=self.c2v[rows])

    def is_valid(self, n_edges: int, clip: float) -> bool:
        return (
            self.v2c.shape[-1] == n_edges
            and self.c2v.shape == self.v2c.shape
            and bool(np.all(np.isfinite(self.v2c)) and np.all(np.isfinite(self.c2v)))
            and bool(np.all(np.abs(self.v2c) <= clip) and np.all(np.abs(self.c2v) <= clip))
        )


@dataclass
class TbResult:
    """Outcome for one transport block."""
    tb_index: int
    decoded: bool
    iterations_used: int
    bit_errors: int
    info_bits: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.info_bits if self.info_bits else 0.0


@dataclass
class DecodeReport:
    """Per-TB outcomes plus batch totals of one decode_batch call."""
    results: list[TbResult]
    total_cnu_edge_ops: int
    max_iters: int
    trace: Optional[list[tuple[int, tuple[int, ...]]]] = field(default=None, repr=False)

    @property
    def n_tbs(self) -> int:
        return len(self.results)

    @property
    def n_decoded(self) -> int:
        return sum(1 for r in self.results if r.decoded)

    @property
    def n_undecoded(self) -> int:
        return self.n_tbs - self.n_decoded

    @property
    def success_fraction(self) -> float:
        return self.n_decoded / self.n_tbs if self.results else 0.0

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations_used for r in self.results)

    @property
    def mean_iterations(self) -> float:
        """Mean over all TBs, failures counted at max_iters."""
        return self.total_iterations / self.n_tbs if self.results else 0.0

    @property
    def mean_iterations_decoded(self) -> Optional[float]:
        """Mean over decoded TBs only; None when nothing decoded."""
        decoded = [r.iterations_used for r in self.results if r.decoded]
        return sum(decoded) / len(decoded) if decoded else None

    @property
    def mean_ber(self) -> float:
        return float(np.mean([r.ber for r in self.results])) if self.results else 0.0

    @property
    def total_bit_errors(self) -> int:
        return sum(r.bit_errors for r in self.results)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tbs": [asdict(r) for r in self.results],
            "total_cnu_edge_ops": self.total_cnu_edge_ops,
            "max_iters": self.max_iters,
            "n_decoded": self.n_decoded,
            "mean_iterations": self.mean_iterations,
            "mean_iterations_decoded": self.mean_iterations_decoded,
            "mean_ber": self.mean_ber,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DecodeReport":
        return cls(
            results=[TbResult(**tb) for tb in data["tbs"]],
            total_cnu_edge_ops=int(data["total_cnu_edge_ops"]),
            max_iters=int(data["max_iters"]),
        )
