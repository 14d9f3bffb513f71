"""LIBSVM ingestion, label normalization, seeded splits and epoch shuffles.

Grammar accepted by :func:`parse_libsvm`, one sample per line::

    <label> <index>:<value> <index>:<value> ...   # optional comment

Indices are 1-based and strictly increasing within a line; values are
decimal or scientific notation.  Blank lines are skipped and ``#`` starts a
comment running to the end of the line.
"""
from __future__ import annotations

import bz2
import gzip
import io
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .linalg import SparseVec
from .rng import SPLIT_STREAM, Xoshiro256


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DegenerateDataset(ValueError):
    pass


class SplitError(ValueError):
    pass


@dataclass(frozen=True)
class Sample:
    features: SparseVec
    label: int | float


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple[Sample, ...]
    n_features: int
    n_classes: int
    label_map: dict[str, int] = field(default_factory=dict)
    has_bias: bool = False

    def __post_init__(self):
        if self.n_features < 1:
            raise ValueError("n_features must be positive")
        for s in self.samples:
            if s.features.max_index() >= self.n_features:
                raise ValueError("feature index beyond n_features")
        if self.n_classes >= 2:
            bad = [s.label for s in self.samples if not 0 <= s.label < self.n_classes]
            if bad:
                raise ValueError(f"label {bad[0]} outside 0..{self.n_classes - 1}")

    def __len__(self):
        return len(self.samples)

    @property
    def is_regression(self) -> bool:
        return self.n_classes == 1

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Samples as an ``(n, n_features)`` CSR matrix, row order preserved."""
        indptr = np.zeros(len(self.samples) + 1, dtype=np.int64)
        for i, s in enumerate(self.samples):
            indptr[i + 1] = indptr[i] + s.features.nnz
        if self.samples:
            indices = np.concatenate([s.features.indices for s in self.samples])
            data = np.concatenate([s.features.values for s in self.samples])
        else:
            indices = np.zeros(0, dtype=np.int64)
            data = np.zeros(0)
        return sp.csr_matrix((data, indices, indptr), shape=(len(self.samples), self.n_features))

    @cached_property
    def labels(self) -> np.ndarray:
        dtype = np.float64 if self.is_regression else np.int64
        return np.array([s.label for s in self.samples], dtype=dtype)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(
            tuple(self.samples[i] for i in indices),
            self.n_features,
            self.n_classes,
            dict(self.label_map),
            self.has_bias,
        )


# --- parsing -----------------------------------------------------------------


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        if path.endswith(".bz2"):
            raise ParseError(
                f"{path}: bzip2 input is not read directly; decompress it first "
                "(the dataset fetcher does this for registry downloads)"
            )
        if path.endswith(".gz"):
            return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
        return open(path, encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8")


def _parse_float(text: str, lineno: int, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"non-numeric {what} {text!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite {what} {text!r}", lineno)
    return v


def _read_rows(source) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """Rows of (raw label, 0-based indices, values) in file order."""
    rows = []
    close = isinstance(source, (str, os.PathLike))
    fh = _open_text(source)
    try:
        for lineno, line in enumerate(fh, start=1):
            cut = line.find("#")
            if cut >= 0:
                line = line[:cut]
            parts = line.split()
            if not parts:
                continue
            label = parts[0]
            if ":" in label:
                raise ParseError(f"missing label, got {label!r}", lineno)
            idx = np.empty(len(parts) - 1, dtype=np.int64)
            val = np.empty(len(parts) - 1)
            prev = 0
            for j, pair in enumerate(parts[1:]):
                key, sep, raw = pair.partition(":")
                if not sep or not key or not raw:
                    raise ParseError(f"malformed pair {pair!r}", lineno)
                try:
                    index = int(key)
                except ValueError:
                    raise ParseError(f"non-integer index {key!r}", lineno) from None
                if index < 1:
                    raise ParseError(f"index {index} is not 1-based", lineno)
                if index <= prev:
                    raise ParseError(
                        f"index {index} not increasing (previous {prev})", lineno
                    )
                prev = index
                idx[j] = index - 1
                val[j] = _parse_float(raw, lineno, "value")
            rows.append((label, idx, val))
    finally:
        if close:
            fh.close()
    if not rows:
        raise ParseError("no samples in input", 0)
    return rows


def normalize_labels(raw_labels: Iterable[str]) -> dict[str, int]:
    """Map distinct raw labels to ``0..L-1``.

    Numeric labels are ordered by value (so ``-1 -> 0``, ``+1 -> 1``); if any
    label is not a number, the order is lexicographic.
    """
    distinct = set(raw_labels)
    if len(distinct) < 2:
        raise DegenerateDataset(f"need at least 2 distinct labels, got {sorted(distinct)}")
    try:
        ordered = sorted(distinct, key=lambda t: (float(t), t))
    except ValueError:
        ordered = sorted(distinct)
    return {lab: k for k, lab in enumerate(ordered)}


def _build(rows, *, add_bias, regression, n_features, label_map) -> Dataset:
    max_index = max((int(r[1][-1]) for r in rows if r[1].size), default=-1)
    base = max_index + 1 if n_features is None else n_features
    if base < max_index + 1:
        raise ParseError(f"feature index {max_index + 1} exceeds n_features={base}")
    base = max(base, 1) if not add_bias else base
    total = base + 1 if add_bias else base
    if regression:
        label_map = {}
        n_classes = 1
    else:
        if label_map is None:
            label_map = normalize_labels(r[0] for r in rows)
        n_classes = len(label_map)
    samples = []
    for lineno, (label, idx, val) in enumerate(rows, start=1):
        if add_bias:
            idx = np.append(idx, base)
            val = np.append(val, 1.0)
        if regression:
            y = _parse_float(label, lineno, "target")
        else:
            try:
                y = label_map[label]
            except KeyError:
                raise ParseError(f"label {label!r} not in label map", lineno) from None
        samples.append(Sample(SparseVec(idx, val, total), y))
    return Dataset(tuple(samples), total, n_classes, dict(label_map), add_bias)


def parse_libsvm(
    source,
    add_bias: bool = True,
    *,
    regression: bool = False,
    n_features: int | None = None,
    label_map: dict[str, int] | None = None,
) -> Dataset:
    """Parse LIBSVM text from a path, bytes, or a binary/text stream.

    ``n_features`` fixes the raw feature count (before the bias column) so
    that a test file lines up with its training file; ``label_map`` reuses a
    previously built mapping.  With ``add_bias`` a constant 1.0 feature is
    appended as the last column.
    """
    rows = _read_rows(source)
    return _build(
        rows, add_bias=add_bias, regression=regression, n_features=n_features, label_map=label_map
    )


def load_libsvm_pair(
    train_source, test_source, add_bias: bool = True, *, regression: bool = False
) -> tuple[Dataset, Dataset]:
    """Parse an official train/test pair into datasets sharing width and labels."""
    train_rows = _read_rows(train_source)
    test_rows = _read_rows(test_source)
    width = 1 + max(
        (int(r[1][-1]) for r in train_rows + test_rows if r[1].size), default=-1
    )
    label_map = None
    if not regression:
        label_map = normalize_labels([r[0] for r in train_rows] + [r[0] for r in test_rows])
    kw = dict(add_bias=add_bias, regression=regression, n_features=width, label_map=label_map)
    return _build(train_rows, **kw), _build(test_rows, **kw)


def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def dump_libsvm(ds: Dataset, stream: IO[str]) -> None:
    """Write ``ds`` back as LIBSVM text (bias column dropped, labels raw)."""
    inverse = {k: lab for lab, k in ds.label_map.items()}
    bias = ds.n_features - 1 if ds.has_bias else None
    for s in ds.samples:
        label = repr(float(s.label)) if ds.is_regression else inverse[s.label]
        pairs = [
            f"{i + 1}:{_fmt(v)}" for i, v in s.features.items() if i != bias
        ]
        stream.write(" ".join([label, *pairs]) + "\n")


def write_libsvm(ds: Dataset, path) -> None:
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as fh:
        dump_libsvm(ds, fh)


# --- splitting and shuffling -------------------------------------------------


def epoch_permutation(n: int, seed: int, epoch: int) -> list[int]:
    """Visiting order for pass ``epoch``; a pure function of ``(n, seed, epoch)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if epoch < 0:
        raise ValueError("epoch must be non-negative")
    return Xoshiro256.for_stream(seed, epoch).permutation(n)


def split_train_test(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    if not 0 < test_fraction < 1:
        raise SplitError("test_fraction must lie in (0, 1)")
    n = len(ds)
    # tolerance keeps 5 * 0.8 from rounding up to 5
    n_train = math.ceil(n * (1 - test_fraction) - 1e-9)
    if n_train < 1 or n_train >= n:
        raise SplitError(f"split of {n} samples at {test_fraction} leaves a side empty")
    perm = Xoshiro256.for_stream(seed, SPLIT_STREAM).permutation(n)
    return ds.subset(perm[:n_train]), ds.subset(perm[n_train:])
