"""Vector kernels shared by the losses and solvers.

Dense vectors are plain 1-D ``float64`` numpy arrays. A sparse example is a
pair of parallel arrays (sorted 0-based feature ids, nonzero values).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when vector lengths or feature indices do not line up."""


@dataclass(frozen=True, eq=False)
class SparseExample:
    """One data instance in canonical sparse form.

    ``indices`` are strictly increasing 0-based feature ids and ``values``
    never contain explicit zeros.
    """

    indices: np.ndarray
    values: np.ndarray
    label: Optional[float] = field(default=None)

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        if idx.shape != val.shape:
            raise DimensionMismatchError(
                f"{idx.size} indices but {val.size} values")
        if idx.size and (idx[0] < 0 or np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be non-negative and strictly increasing")
        if np.any(val == 0.0):
            keep = val != 0.0
            idx, val = idx[keep], val[keep]
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, float]], label=None) -> "SparseExample":
        if len(pairs) == 0:
            return cls(np.empty(0, np.int64), np.empty(0), label)
        idx, val = zip(*pairs)
        return cls(np.array(idx), np.array(val, dtype=float), label)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def max_index(self) -> int:
        """Largest stored feature id, or -1 for an empty example."""
        return int(self.indices[-1]) if self.indices.size else -1

    def pairs(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def __eq__(self, other):
        if not isinstance(other, SparseExample):
            return NotImplemented
        return (np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values)
                and self.label == other.label)

    def __repr__(self):
        return f"SparseExample({self.pairs()!r}, label={self.label!r})"


def dot(a: np.ndarray, b: SparseExample) -> float:
    """Inner product of a dense vector with a sparse example."""
    if b.indices.size and b.indices[-1] >= a.shape[0]:
        raise DimensionMismatchError(
            f"feature index {int(b.indices[-1])} out of range for length {a.shape[0]}")
    if b.indices.size == 0:
        return 0.0
    return float(a[b.indices] @ b.values)


def norm(a: np.ndarray) -> float:
    """Euclidean norm."""
    return float(np.sqrt(np.dot(a, a)))


def multiply_accumulate(x: np.ndarray, alpha: float, g: np.ndarray) -> np.ndarray:
    """Return ``x - alpha * g`` as a new array."""
    if x.shape != g.shape:
        raise DimensionMismatchError(f"length {x.shape} vs {g.shape}")
    return x - alpha * g


def axpy_sparse(w: np.ndarray, alpha: float, b: SparseExample) -> None:
    """In place ``w += alpha * b``."""
    if b.indices.size:
        w[b.indices] += alpha * b.values
