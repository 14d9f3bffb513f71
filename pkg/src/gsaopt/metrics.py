"""Test-set evaluation: clipped cross-entropy, accuracy, ROC-AUC, running-min loss."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit, logsumexp
from scipy.stats import rankdata

from .data import Dataset
from .models import LinearModel

CLIP = 1e-15
CLIP_CEILING = -math.log(CLIP)  # ~34.538776, worst per-sample loss
DIVERGENCE_LOSS = 1e6


class UndefinedAUC(ValueError):
    pass


@dataclass(frozen=True)
class MetricsRecord:
    pass_index: int
    loss: float
    precision: Optional[float]
    auc: Optional[float]
    elapsed: float  # milliseconds of training time up to this pass
    diverged: bool = False


def _require(dataset: Dataset):
    if len(dataset) == 0:
        raise ValueError("empty dataset")


def logits(model: LinearModel, dataset: Dataset) -> np.ndarray:
    """``(n, L)`` scores ``X W'`` for the whole dataset."""
    if dataset.n_features != model.n_features:
        raise ValueError(
            f"dataset has {dataset.n_features} features, model {model.n_features}"
        )
    return np.asarray(dataset.matrix @ model.weights.T)


def predict_proba(model: LinearModel, dataset: Dataset) -> np.ndarray:
    """Class probabilities; a logistic model yields columns ``(p0, p1)``."""
    z = logits(model, dataset)
    if model.kind == "logistic":
        p1 = expit(z[:, 0])
        return np.column_stack([1.0 - p1, p1])
    if model.kind == "softmax":
        return np.exp(z - logsumexp(z, axis=1, keepdims=True))
    raise ValueError("probabilities are defined for classifiers only")


def _true_class_prob(model: LinearModel, dataset: Dataset) -> np.ndarray:
    y = dataset.labels
    z = logits(model, dataset)
    if model.kind == "logistic":
        # sigmoid of the signed margin avoids computing 1 - p1 when p1 ~ 1
        return expit(np.where(y == 1, z[:, 0], -z[:, 0]))
    p = np.exp(z - logsumexp(z, axis=1, keepdims=True))
    return p[np.arange(len(y)), y]


def mean_cross_entropy(model: LinearModel, dataset: Dataset) -> float:
    """Mean of ``-ln p(true class)`` with the probability clipped to ``[1e-15, 1 - 1e-15]``."""
    _require(dataset)
    p = np.clip(_true_class_prob(model, dataset), CLIP, 1.0 - CLIP)
    return float(np.mean(-np.log(p)))


def raw_cross_entropy(model: LinearModel, dataset: Dataset) -> float:
    """Unclipped mean cross-entropy computed from logits; used to flag divergence."""
    _require(dataset)
    y = dataset.labels
    z = logits(model, dataset)
    if model.kind == "logistic":
        m = np.where(y == 1, z[:, 0], -z[:, 0])
        return float(np.mean(np.logaddexp(0.0, -m)))
    return float(np.mean(logsumexp(z, axis=1) - z[np.arange(len(y)), y]))


def precision(model: LinearModel, dataset: Dataset) -> float:
    """Accuracy of the arg-max class; ties go to the lowest class index."""
    _require(dataset)
    z = logits(model, dataset)
    if model.kind == "logistic":
        pred = (z[:, 0] > 0).astype(np.int64)
    else:
        pred = np.argmax(z, axis=1)
    return float(np.mean(pred == dataset.labels))


def roc_auc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counted one half.

    Mann-Whitney rank statistic with average ranks for ties.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUC("ROC-AUC needs both classes present")
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Area under the precision-recall step curve (alternative reading of precision)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise UndefinedAUC("average precision needs a positive sample")
    order = np.argsort(-scores, kind="mergesort")
    s, y = scores[order], (labels[order] == 1)
    # evaluate only at the last position of each tied score block
    last = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    tp = np.cumsum(y)[last]
    prec = tp / (last + 1)
    recall_gain = np.diff(np.r_[0, tp]) / n_pos
    return float(np.sum(prec * recall_gain))


def positive_scores(model: LinearModel, dataset: Dataset) -> np.ndarray:
    if model.kind == "logistic":
        return expit(logits(model, dataset)[:, 0])
    if model.kind == "softmax" and model.n_rows == 2:
        return predict_proba(model, dataset)[:, 1]
    raise ValueError("positive-class scores need a binary classifier")


@dataclass(frozen=True)
class MinLossTracker:
    f_m: float = math.inf


def track_min_loss(tracker: MinLossTracker, loss: float) -> MinLossTracker:
    if math.isnan(loss):
        return tracker
    return MinLossTracker(min(tracker.f_m, loss))


def _half_mse(model: LinearModel, dataset: Dataset) -> float:
    r = dataset.labels - logits(model, dataset)[:, 0]
    return float(np.mean(0.5 * r * r))


def evaluate(
    model: LinearModel,
    dataset: Dataset,
    pass_index: int,
    elapsed_ms: float = 0.0,
    precision_metric: str = "accuracy",
) -> MetricsRecord:
    """All table metrics for one pass.

    A run counts as diverged when any weight is non-finite or the unclipped
    loss exceeds 1e6; the reported loss stays the clipped one.
    """
    _require(dataset)
    with np.errstate(over="ignore", invalid="ignore"):
        finite = bool(np.all(np.isfinite(model.weights)))
        if model.kind == "linear":
            loss = _half_mse(model, dataset)
            return MetricsRecord(
                pass_index, loss, None, None, elapsed_ms, not (finite and loss < DIVERGENCE_LOSS)
            )
        loss = mean_cross_entropy(model, dataset)
        raw = raw_cross_entropy(model, dataset)
        diverged = not finite or not raw < DIVERGENCE_LOSS
        auc = None
        binary = model.kind == "logistic" or model.n_rows == 2
        if binary and finite:
            scores = positive_scores(model, dataset)
            labels = dataset.labels
            try:
                auc = roc_auc(scores, labels)
            except UndefinedAUC:
                auc = None
        if precision_metric == "accuracy":
            prec = precision(model, dataset) if finite else math.nan
        elif precision_metric == "average_precision":
            prec = average_precision(positive_scores(model, dataset), dataset.labels)
        else:
            raise ValueError(f"unknown precision metric {precision_metric!r}")
    return MetricsRecord(pass_index, loss, prec, auc, elapsed_ms, diverged)
