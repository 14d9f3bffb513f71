"""Greedy Step Averaging (GSA): a learning-rate-free SGD for sparse linear models."""
from .data import Dataset, Sample, epoch_permutation, load_libsvm_pair, parse_libsvm, split_train_test
from .gsa import GsaConfig, GsaState, gsa_step, gsa_train
from .linalg import SparseVec
from .metrics import MetricsRecord, evaluate
from .models import LinearModel

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "GsaConfig",
    "GsaState",
    "LinearModel",
    "MetricsRecord",
    "Sample",
    "SparseVec",
    "epoch_permutation",
    "evaluate",
    "gsa_step",
    "gsa_train",
    "load_libsvm_pair",
    "parse_libsvm",
    "split_train_test",
]
