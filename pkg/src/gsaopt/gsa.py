"""Greedy Step Averaging.

For each sample, the *greedy* step is the step length along that sample's
negative gradient which drives its own loss to a target: zero residual for
least squares, and probability ``p_hat`` of the true class for logistic and
softmax regression.  The rate actually applied is the running arithmetic
mean of all greedy steps seen so far, so the method needs no learning rate.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import models
from .data import Dataset, Sample, epoch_permutation
from .linalg import SparseVec, sparse_sq_norm
from .models import LinearModel, sigmoid

E = math.e


@dataclass(frozen=True)
class GsaConfig:
    p_hat: float = 0.95
    clamp_negative: bool = True
    eta_max: float = 1e4
    # "approx" uses the softmax-derived binary step, "exact" the closed-form
    # logistic line search
    logistic_rule: str = "approx"

    def __post_init__(self):
        if not 0.5 < self.p_hat < 1.0:
            raise ValueError("p_hat must lie strictly between 0.5 and 1")
        if not self.eta_max > 0:
            raise ValueError("eta_max must be positive")
        if self.logistic_rule not in ("approx", "exact"):
            raise ValueError("logistic_rule is 'approx' or 'exact'")


@dataclass(frozen=True)
class GsaState:
    mean_eta: float = 0.0
    t: int = 0


def _clamp(eta: float, clamp_negative: bool, eta_max: float) -> float:
    lo = 0.0 if clamp_negative else -eta_max
    return min(max(eta, lo), eta_max)


# --- greedy step lengths -----------------------------------------------------
# Each returns None ("skip") when the step is undefined for the sample.


def greedy_step_linreg(x: SparseVec) -> Optional[float]:
    """``1 / x'x``: one step of this length zeroes the sample's residual."""
    sq = sparse_sq_norm(x)
    return 1.0 / sq if sq > 0 else None


def greedy_step_logistic_exact(w, x: SparseVec, y: int, p_hat: float = 0.95) -> Optional[float]:
    """Exact logistic line search to probability ``p_hat`` (``1 - p_hat`` if y=0).

    Not clamped: a sample already past the threshold yields a negative step.
    """
    sq = sparse_sq_norm(x)
    if sq <= 0:
        return None
    z = models.sparse_dot(x, models._row(w))
    p = sigmoid(z)
    if abs(y - p) < 1e-12:
        return None
    target = math.copysign(1.0, y - 0.5) * math.log(p_hat / (1.0 - p_hat))
    return (target - z) / (sq * (y - p))


def softmax_greedy_lambda(z: np.ndarray, k: int, p_hat: float) -> Optional[float]:
    """Linearised solution ``lambda = eta * x'x`` for true class ``k``.

    Numerator and denominator of the approximation are both proportional
    to ``sum_j exp(z_j)``, so they are evaluated after dividing it out:
    ``(p_k - p_hat) / (p_hat (1 - p.b) + p_k (1 - e / b_k))`` with
    ``b = exp(p)``.
    """
    e = np.exp(z - z.max())
    p = e / e.sum()
    b = np.exp(p)
    num = p[k] - p_hat
    den = p_hat * (1.0 - float(p @ b)) + p[k] * (1.0 - E / b[k])
    if abs(den) < 1e-300:
        return None
    return num / den


def greedy_step_softmax(
    W: np.ndarray,
    x: SparseVec,
    k: int,
    p_hat: float = 0.95,
    *,
    clamp_negative: bool = True,
    eta_max: float = 1e4,
) -> Optional[float]:
    sq = sparse_sq_norm(x)
    if sq <= 0:
        return None
    lam = softmax_greedy_lambda(models.softmax_logits(np.asarray(W, dtype=np.float64), x), k, p_hat)
    if lam is None:
        return None
    return _clamp(lam / sq, clamp_negative, eta_max)


def binary_greedy_lambda(p1: float, y: int, p_hat: float) -> Optional[float]:
    """Binary-logistic form of the softmax step; returns ``eta * x'x / 2``."""
    p0 = 1.0 - p1
    b0, b1 = math.exp(p0), math.exp(p1)
    common = p_hat * (1.0 - p0 * b0 - p1 * b1)
    if y == 1:
        num, den = p1 - p_hat, common + p1 * (1.0 - b0)
    else:
        num, den = p0 - p_hat, common + p0 * (1.0 - b1)
    if abs(den) < 1e-300:
        return None
    return num / den


def greedy_step_logistic_binary(
    w,
    x: SparseVec,
    y: int,
    p_hat: float = 0.95,
    *,
    clamp_negative: bool = True,
    eta_max: float = 1e4,
) -> Optional[float]:
    """Step for a single-row logistic model, equal to twice the two-class softmax step."""
    sq = sparse_sq_norm(x)
    if sq <= 0:
        return None
    lam = binary_greedy_lambda(models.logistic_forward(w, x), y, p_hat)
    if lam is None:
        return None
    return _clamp(2.0 * lam / sq, clamp_negative, eta_max)


# --- averaging and the training loop ----------------------------------------


def running_mean_update(state: GsaState, eta: Optional[float]) -> GsaState:
    if eta is None:
        return state
    t = state.t + 1
    return GsaState(((t - 1) * state.mean_eta + eta) / t, t)


def greedy_step(model: LinearModel, x: SparseVec, y, config: GsaConfig) -> Optional[float]:
    """Kind-appropriate greedy step for ``(x, y)`` under ``config``."""
    sq = float(x.values @ x.values)
    if sq <= 0:
        return None
    W = model.weights
    if model.kind == "linear":
        return 1.0 / sq
    if model.kind == "softmax":
        lam = softmax_greedy_lambda(W[:, x.indices] @ x.values, y, config.p_hat)
        eta = None if lam is None else lam / sq
    elif config.logistic_rule == "approx":
        lam = binary_greedy_lambda(sigmoid(float(W[0, x.indices] @ x.values)), y, config.p_hat)
        eta = None if lam is None else 2.0 * lam / sq
    else:
        eta = greedy_step_logistic_exact(W, x, y, config.p_hat)
    if eta is None:
        return None
    return _clamp(eta, config.clamp_negative, config.eta_max)


def _gsa_update(model: LinearModel, state: GsaState, config: GsaConfig, x: SparseVec, y):
    _, coeffs = models.loss_grad(model, x, y)
    eta = greedy_step(model, x, y, config)
    state = running_mean_update(state, eta)
    if state.mean_eta != 0.0:
        models.apply_update(model, coeffs, x, state.mean_eta)
    return state, eta


def gsa_step(model: LinearModel, state: GsaState, config: GsaConfig, sample: Sample):
    """One GSA iteration on ``sample``; mutates ``model.weights``.

    A skipped greedy step leaves the average untouched, but the current
    average rate is still applied to the sample's gradient.
    """
    state, _ = _gsa_update(model, state, config, sample.features, sample.label)
    return model, state


@dataclass
class StepTrace:
    eta: list = field(default_factory=list)
    mean_eta: list = field(default_factory=list)

    def __len__(self):
        return len(self.eta)

    def to_csv(self, path_or_stream) -> None:
        """Write ``step,eta,mean_eta`` rows; skipped steps carry an empty eta."""
        own = isinstance(path_or_stream, (str, bytes)) or hasattr(path_or_stream, "__fspath__")
        fh = open(path_or_stream, "w", newline="") if own else path_or_stream
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "eta", "mean_eta"])
            for i, (e, m) in enumerate(zip(self.eta, self.mean_eta), start=1):
                w.writerow([i, "" if e is None else repr(e), repr(m)])
        finally:
            if own:
                fh.close()


EvalHook = Callable[[int, LinearModel], None]


def gsa_train(
    model: LinearModel,
    dataset: Dataset,
    passes: int,
    seed: int = 0,
    config: GsaConfig = GsaConfig(),
    eval_hook: Optional[EvalHook] = None,
    state: GsaState = GsaState(),
):
    """Run ``passes`` shuffled passes of GSA; returns ``(model, state, trace)``.

    The averaging state carries over between passes.  ``eval_hook(k, model)``
    is called after pass ``k`` (1-based).
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    trace = StepTrace()
    samples = dataset.samples
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(passes):
            for i in epoch_permutation(len(samples), seed, epoch):
                s = samples[i]
                state, eta = _gsa_update(model, state, config, s.features, s.label)
                trace.eta.append(eta)
                trace.mean_eta.append(state.mean_eta)
            if eval_hook is not None:
                eval_hook(epoch + 1, model)
    return model, state, trace
