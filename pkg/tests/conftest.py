from pathlib import Path

import numpy as np
import pytest

from gsaopt.data import Dataset, Sample
from gsaopt.linalg import SparseVec

DATA = Path(__file__).parent / "data"


def random_sparse(rng: np.random.Generator, dim: int, density: float = 0.5) -> SparseVec:
    mask = rng.random(dim) < density
    idx = np.nonzero(mask)[0]
    return SparseVec(idx, rng.normal(size=idx.size), dim)


def blobs(n: int = 200, seed: int = 0, n_classes: int = 2, sep: float = 2.0) -> Dataset:
    """Gaussian blobs in 2-D plus a bias column, labels 0..n_classes-1."""
    rng = np.random.default_rng(seed)
    centers = sep * np.column_stack([np.cos(np.arange(n_classes) * 2 * np.pi / n_classes),
                                     np.sin(np.arange(n_classes) * 2 * np.pi / n_classes)])
    labels = rng.integers(n_classes, size=n)
    X = centers[labels] + rng.normal(size=(n, 2))
    samples = tuple(
        Sample(SparseVec([0, 1, 2], [x[0], x[1], 1.0], 3), int(y)) for x, y in zip(X, labels)
    )
    return Dataset(samples, 3, n_classes, {str(k): k for k in range(n_classes)}, True)


@pytest.fixture
def toy_blobs():
    return blobs()


@pytest.fixture
def data_dir():
    return DATA


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.LINES, key=lambda l: int(l.split()[1])):
        terminalreporter.write_line(line)
