"""Linear, logistic and softmax regression on sparse samples.

Every per-sample gradient is returned as coefficients ``c`` (one per weight
row) with ``grad_row_l = c[l] * x``, so updates touch only ``nnz(x)``
columns.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SparseVec, sparse_dot, stable_softmax

KINDS = ("linear", "logistic", "softmax")


@dataclass(eq=False)
class LinearModel:
    kind: str
    weights: np.ndarray  # (L, p); L == 1 unless softmax
    has_bias: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim == 1:
            w = w.reshape(1, -1)
        if self.kind == "softmax":
            if w.shape[0] < 2:
                raise ValueError("softmax needs at least 2 weight rows")
        elif w.shape[0] != 1:
            raise ValueError(f"{self.kind} model has exactly one weight row")
        self.weights = w

    @classmethod
    def zeros(cls, kind: str, n_features: int, n_classes: int = 2, has_bias: bool = False):
        rows = n_classes if kind == "softmax" else 1
        return cls(kind, np.zeros((rows, n_features)), has_bias)

    @classmethod
    def for_dataset(cls, kind: str, ds) -> "LinearModel":
        return cls.zeros(kind, ds.n_features, ds.n_classes, ds.has_bias)

    @property
    def n_rows(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "LinearModel":
        return LinearModel(self.kind, self.weights.copy(), self.has_bias)

    def __eq__(self, other):
        if not isinstance(other, LinearModel):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.has_bias == other.has_bias
            and self.weights.shape == other.weights.shape
            and np.array_equal(self.weights, other.weights)
        )


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _row(w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    return w[0] if w.ndim == 2 else w


def logistic_forward(w, x: SparseVec) -> float:
    return sigmoid(sparse_dot(x, _row(w)))


def _logistic_from_logit(z: float, y: int) -> tuple[float, float]:
    # log(1 + e^z) - y z, written so neither branch overflows
    loss = math.log1p(math.exp(-abs(z))) + max(z, 0.0) - y * z
    return loss, sigmoid(z) - y


def logistic_loss_grad(w, x: SparseVec, y: int) -> tuple[float, float]:
    """Cross-entropy loss and gradient coefficient ``p1 - y`` for ``y in {0, 1}``."""
    return _logistic_from_logit(sparse_dot(x, _row(w)), y)


def softmax_logits(W: np.ndarray, x: SparseVec) -> np.ndarray:
    if x.max_index() >= W.shape[1]:
        sparse_dot(x, W[0])  # raises the dimension error
    return W[:, x.indices] @ x.values


def softmax_forward(W: np.ndarray, x: SparseVec) -> np.ndarray:
    return stable_softmax(softmax_logits(np.asarray(W, dtype=np.float64), x))


def _softmax_from_logits(z: np.ndarray, k: int) -> tuple[float, np.ndarray]:
    shifted = z - z.max()
    e = np.exp(shifted)
    s = e.sum()
    loss = math.log(s) - shifted[k]
    coeffs = e / s
    coeffs[k] -= 1.0
    return float(loss), coeffs


def softmax_loss_grad(W: np.ndarray, x: SparseVec, k: int) -> tuple[float, np.ndarray]:
    """``-log p_k`` from shifted logits, and coefficients ``p - onehot(k)``."""
    W = np.asarray(W, dtype=np.float64)
    if not 0 <= k < W.shape[0]:
        raise ValueError(f"class {k} outside 0..{W.shape[0] - 1}")
    return _softmax_from_logits(softmax_logits(W, x), k)


def linreg_loss_grad(w, x: SparseVec, y: float) -> tuple[float, float]:
    r = y - sparse_dot(x, _row(w))
    return 0.5 * r * r, -r


def loss_grad(model: LinearModel, x: SparseVec, y) -> tuple[float, np.ndarray]:
    """Dispatch on ``model.kind``; coefficients always come back as an array."""
    W = model.weights
    if model.kind == "softmax":
        return _softmax_from_logits(W[:, x.indices] @ x.values, y)
    z = float(W[0, x.indices] @ x.values)
    if model.kind == "logistic":
        loss, c = _logistic_from_logit(z, y)
    else:
        r = y - z
        loss, c = 0.5 * r * r, -r
    return loss, np.array([c])


def apply_update(model: LinearModel, coeffs: np.ndarray, x: SparseVec, step: float) -> None:
    """``W[l] -= step * coeffs[l] * x`` for every row, touching nnz(x) columns."""
    if x.indices.size:
        model.weights[:, x.indices] -= step * np.outer(coeffs, x.values)
