"""Small sparse/dense kernels shared by the models and optimizers.

A sample's features are a :class:`SparseVec` (sorted indices plus values);
weight rows are plain 1-D float64 numpy arrays.
"""
from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np


class DimensionMismatch(ValueError):
    """A sparse index does not fit the dense vector it is combined with."""


class SparseVec:
    """Immutable sparse vector with strictly increasing indices.

    ``dim`` is the declared dimensionality; it may exceed ``max(index) + 1``
    and is ``None`` when unknown.
    """

    __slots__ = ("indices", "values", "dim")

    def __init__(self, indices, values, dim: int | None = None):
        idx = np.array(indices, dtype=np.int64).reshape(-1)
        val = np.array(values, dtype=np.float64).reshape(-1)
        if idx.shape != val.shape:
            raise ValueError("indices and values differ in length")
        if idx.size:
            if idx[0] < 0:
                raise ValueError("negative index")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if not np.all(np.isfinite(val)):
                raise ValueError("non-finite value in sparse vector")
            if dim is not None and idx[-1] >= dim:
                raise DimensionMismatch(f"index {idx[-1]} >= dim {dim}")
        if dim is not None and dim < 0:
            raise ValueError("dim must be non-negative")
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "dim", dim)

    def __setattr__(self, name, value):
        raise AttributeError("SparseVec is immutable")

    @classmethod
    def from_dict(cls, entries: Mapping[int, float], dim: int | None = None) -> "SparseVec":
        keys = sorted(entries)
        return cls(keys, [entries[k] for k in keys], dim)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]], dim: int | None = None) -> "SparseVec":
        pairs = list(pairs)
        return cls([i for i, _ in pairs], [v for _, v in pairs], dim)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def max_index(self) -> int:
        return int(self.indices[-1]) if self.indices.size else -1

    def to_dense(self, n: int | None = None) -> np.ndarray:
        n = (self.dim if self.dim is not None else self.max_index() + 1) if n is None else n
        if self.max_index() >= n:
            raise DimensionMismatch(f"index {self.max_index()} >= length {n}")
        out = np.zeros(n)
        out[self.indices] = self.values
        return out

    def items(self):
        return zip(self.indices.tolist(), self.values.tolist())

    def __len__(self):
        return self.nnz

    def __eq__(self, other):
        if not isinstance(other, SparseVec):
            return NotImplemented
        return (
            np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.indices.tobytes(), self.values.tobytes()))

    def __repr__(self):
        body = ", ".join(f"{i}: {v!r}" for i, v in self.items())
        return f"SparseVec({{{body}}}, dim={self.dim})"


def _check_fits(s: SparseVec, n: int) -> None:
    if s.max_index() >= n:
        raise DimensionMismatch(f"sparse index {s.max_index()} out of range for length {n}")


def sparse_dot(s: SparseVec, d: np.ndarray) -> float:
    """Return ``sum(value * d[index])`` over the entries of ``s``."""
    _check_fits(s, len(d))
    if not s.indices.size:
        return 0.0
    return float(np.dot(s.values, d[s.indices]))


def sparse_sq_norm(s: SparseVec) -> float:
    return float(np.dot(s.values, s.values))


def scaled_add(d: np.ndarray, a: float, s: SparseVec) -> np.ndarray:
    """In-place ``d[index] += a * value``; returns ``d``."""
    if not np.isfinite(a):
        raise ValueError("scale must be finite")
    _check_fits(s, len(d))
    d[s.indices] += a * s.values
    return d


def stable_softmax(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size < 2:
        raise ValueError("softmax needs at least two logits")
    e = np.exp(z - z.max())
    return e / e.sum()
