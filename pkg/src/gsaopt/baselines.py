"""Comparison optimizers: constant-rate SGD, whole-time-average Adadelta, SCSG."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import models
from .data import Dataset, Sample, epoch_permutation
from .gsa import EvalHook
from .linalg import SparseVec
from .models import LinearModel


@dataclass(frozen=True)
class SgdConfig:
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValueError("SGD rate must be finite and non-negative")


def sgd_step(model: LinearModel, config: SgdConfig, sample: Sample) -> LinearModel:
    _, coeffs = models.loss_grad(model, sample.features, sample.label)
    models.apply_update(model, coeffs, sample.features, config.rate)
    return model


def sgd_train(
    model: LinearModel,
    dataset: Dataset,
    passes: int,
    seed: int,
    config: SgdConfig,
    eval_hook: Optional[EvalHook] = None,
) -> LinearModel:
    if passes < 1:
        raise ValueError("passes must be >= 1")
    samples = dataset.samples
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(passes):
            for i in epoch_permutation(len(samples), seed, epoch):
                sgd_step(model, config, samples[i])
            if eval_hook is not None:
                eval_hook(epoch + 1, model)
    return model


class AdadeltaState:
    """Per-weight accumulators for Adadelta with decay ``(t-1)/t``.

    With that decay both running averages are plain means over all steps so
    far, so the state keeps sums and divides by the step count: a weight
    that receives no gradient for a while decays exactly as if it had been
    updated with zeros, at no cost.
    """

    def __init__(self, shape, eps: float):
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.eps = float(eps)
        self.sum_g2 = np.zeros(shape)
        self.sum_dx2 = np.zeros(shape)
        self.t = 0

    @classmethod
    def for_model(cls, model: LinearModel, eps: float) -> "AdadeltaState":
        return cls(model.weights.shape, eps)

    @property
    def mean_g2(self) -> np.ndarray:
        return self.sum_g2 / max(self.t, 1)

    @property
    def mean_dx2(self) -> np.ndarray:
        return self.sum_dx2 / max(self.t, 1)


def adadelta_step(model: LinearModel, state: AdadeltaState, sample: Sample):
    if state.sum_g2.shape != model.weights.shape:
        raise ValueError("Adadelta state shape does not match the model")
    x = sample.features
    _, coeffs = models.loss_grad(model, x, sample.label)
    t = state.t + 1
    cols = x.indices
    if cols.size:
        g = np.outer(coeffs, x.values)
        sum_g2 = state.sum_g2[:, cols] + g * g
        prev_dx2 = state.sum_dx2[:, cols] / (t - 1) if t > 1 else 0.0
        delta = -np.sqrt(prev_dx2 + state.eps) / (np.sqrt(sum_g2 / t) + state.eps) * g
        model.weights[:, cols] += delta
        state.sum_g2[:, cols] = sum_g2
        state.sum_dx2[:, cols] += delta * delta
    state.t = t
    return model, state


def adadelta_train(
    model: LinearModel,
    dataset: Dataset,
    passes: int,
    seed: int,
    eps: float,
    eval_hook: Optional[EvalHook] = None,
):
    if passes < 1:
        raise ValueError("passes must be >= 1")
    state = AdadeltaState.for_model(model, eps)
    samples = dataset.samples
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(passes):
            for i in epoch_permutation(len(samples), seed, epoch):
                adadelta_step(model, state, samples[i])
            if eval_hook is not None:
                eval_hook(epoch + 1, model)
    return model, state


@dataclass(frozen=True)
class ScsgConfig:
    rate: float
    batch_size: int

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ValueError("SCSG rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")


def batch_gradient(model: LinearModel, dataset: Dataset, rows) -> np.ndarray:
    """Mean gradient over ``rows`` of ``dataset`` as a dense ``(L, p)`` array."""
    rows = np.asarray(rows)
    C = np.empty((model.n_rows, rows.size))
    for j, i in enumerate(rows):
        s = dataset.samples[i]
        C[:, j] = models.loss_grad(model, s.features, s.label)[1]
    X = dataset.matrix[rows]
    return np.asarray((X.T @ C.T).T) / rows.size


def _sample_grad(model: LinearModel, x: SparseVec, y) -> np.ndarray:
    return models.loss_grad(model, x, y)[1]


def scsg_epoch(
    model: LinearModel,
    config: ScsgConfig,
    dataset: Dataset,
    rng: np.random.Generator,
    budget: Optional[int] = None,
    on_visit=None,
) -> int:
    """One SCSG epoch; returns the number of sample visits it used.

    Anchor at the current weights, take the mean gradient over a batch of
    ``B`` samples drawn without replacement, then run ``1 + Poisson(B)``
    variance-corrected steps on uniformly drawn samples.  ``budget`` caps
    the visits (the batch counts ``B``); ``on_visit(n)`` is called with the
    running visit count after the batch and after every inner step.
    """
    n = len(dataset)
    B = config.batch_size
    if B > n:
        raise ValueError(f"batch size {B} exceeds dataset size {n}")
    batch = rng.choice(n, size=B, replace=False)
    anchor = model.copy()
    mu = batch_gradient(anchor, dataset, batch)
    visits = B
    if on_visit is not None:
        on_visit(visits)
    inner = 1 + int(rng.poisson(B))
    if budget is not None:
        inner = max(0, min(inner, budget - visits))
    W = model.weights
    rate = config.rate
    for _ in range(inner):
        s = dataset.samples[int(rng.integers(n))]
        x = s.features
        c_now = _sample_grad(model, x, s.label)
        c_anchor = _sample_grad(anchor, x, s.label)
        W -= rate * mu
        if x.indices.size:
            W[:, x.indices] -= rate * np.outer(c_now - c_anchor, x.values)
        visits += 1
        if on_visit is not None:
            on_visit(visits)
    return visits


def scsg_train(
    model: LinearModel,
    dataset: Dataset,
    passes: int,
    seed: int,
    config: ScsgConfig,
    eval_hook: Optional[EvalHook] = None,
) -> LinearModel:
    """Run SCSG epochs until ``passes * n`` sample visits have been spent.

    Pass ``k`` is reported the moment the visit count reaches ``k * n``.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    n = len(dataset)
    if config.batch_size > n:
        raise ValueError(f"batch size {config.batch_size} exceeds dataset size {n}")
    rng = np.random.default_rng(seed)
    total = passes * n
    done = 0
    reported = 0

    def on_visit(v):
        nonlocal reported
        while reported < passes and done + v >= (reported + 1) * n:
            reported += 1
            if eval_hook is not None:
                eval_hook(reported, model)

    with np.errstate(over="ignore", invalid="ignore"):
        while done < total:
            done += scsg_epoch(model, config, dataset, rng, budget=total - done, on_visit=on_visit)
    return model
