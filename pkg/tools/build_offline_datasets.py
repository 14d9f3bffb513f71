"""Rebuild desk-scale LIBSVM datasets from upstream raw data shipped on PyPI.

The LIBSVM mirror is not always reachable (air-gapped CI, sandboxes), but
the raw UCI/NIPS data behind five of the benchmark files is redistributed
inside ordinary PyPI wheels.  This script downloads those wheels with
``pip download``, applies the same preprocessing the LIBSVM maintainers
describe for each file, and writes gzipped LIBSVM text to ``tests/data``:

  breast-cancer_scale   MASS::biopsy (rdatasets): drop 16 rows with missing
                        values, keep the sample-code column as feature 1,
                        scale every feature to [-1, 1]; labels 2/4.
  madelon, madelon.t    Py_FS Madelon.csv: first 2000 rows are the NIPS 2003
                        training set, last 600 the validation set; raw
                        integer features, labels -1/+1.
  dna.scale             UCI splice junctions (keel-ds): drop sequences with
                        ambiguous bases, code A/C/G/T as 100/010/001/000
                        (180 binary features), classes EI/IE/N -> 1/2/3.
  letter.scale          UCI letter (keel-ds): scale 16 features to [-1, 1],
                        letters A..Z -> 1..26.
  a9a                   UCI adult training file (responsibly): 123 binary
                        features, continuous attributes quantile-binned on
                        the training data, categorical attributes one-hot.

w1a has no redistributed source and is not rebuilt.  Row order of the keel
sources is not the original one, so dna/letter get the seeded 2000/1186 and
15000/5000 splits at run time instead of the official files.

Usage::

    python tools/build_offline_datasets.py [--out tests/data] [--wheels DIR]
"""
from __future__ import annotations

import argparse
import gzip
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np
import pandas as pd

WHEELS = {
    "rdatasets": "rdatasets==0.2.10",
    "Py_FS": "py-fs==0.2.1",
    "keel_ds": "keel-ds==0.2.5",
    "responsibly": "responsibly==0.1.2",
}


def fetch_wheels(dest: Path) -> dict[str, Path]:
    dest.mkdir(parents=True, exist_ok=True)
    found = {}
    for prefix, req in WHEELS.items():
        have = sorted(dest.glob(f"{prefix}-*.whl"))
        if not have:
            subprocess.run(
                [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(dest), req],
                check=True,
            )
            have = sorted(dest.glob(f"{prefix}-*.whl"))
        found[prefix] = have[-1]
    return found


def member(wheel: Path, name: str) -> bytes:
    with zipfile.ZipFile(wheel) as z:
        return z.read(name)


def fmt(v: float) -> str:
    return f"{v:.6g}"


def scale(X: np.ndarray) -> np.ndarray:
    """svm-scale default: each column mapped linearly onto [-1, 1]."""
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return np.where(hi > lo, (X - lo) / span * 2.0 - 1.0, 0.0)


def write(path: Path, labels, X) -> None:
    with gzip.open(path, "wt", encoding="utf-8", compresslevel=9) as fh:
        for y, row in zip(labels, X):
            nz = np.nonzero(row)[0]
            fh.write(" ".join([str(y)] + [f"{j + 1}:{fmt(row[j])}" for j in nz]) + "\n")
    print(f"wrote {path} ({len(labels)} rows)")


def breast_cancer(wheel: Path, out: Path) -> None:
    raw = member(wheel, "rdatasets/_data/MASS/biopsy.pkl.compress")
    with tempfile.NamedTemporaryFile(suffix=".pkl.xz") as tmp:
        tmp.write(raw)
        tmp.flush()
        df = pd.read_pickle(tmp.name, compression="xz")
    df = df.dropna()
    X = np.column_stack([df["ID"].astype(np.int64)] + [df[f"V{i}"] for i in range(1, 10)])
    X = scale(X.astype(float))
    labels = np.where(df["class"] == "malignant", 4, 2)
    write(out / "breast-cancer_scale.gz", labels, X)


def madelon(wheel: Path, out: Path) -> None:
    raw = member(wheel, "Py_FS/datasets/database/Madelon.csv").decode()
    M = np.loadtxt(io.StringIO(raw), delimiter=",")
    X, y = M[:, :-1], M[:, -1]
    labels = np.where(y == 2, "+1", "-1")
    write(out / "madelon.gz", labels[:2000], X[:2000])
    write(out / "madelon.t.gz", labels[2000:], X[2000:])


def _keel_rows(wheel: Path, name: str) -> list[list[str]]:
    text = member(wheel, f"keel_ds/data/balanced/raw/{name}.dat").decode()
    rows = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        rows.append([t.strip() for t in line.split(",")])
    return rows


def dna(wheel: Path, out: Path) -> None:
    code = {"A": (1, 0, 0), "C": (0, 1, 0), "G": (0, 0, 1), "T": (0, 0, 0)}
    classes = {"EI": 1, "IE": 2, "N": 3}
    X, labels = [], []
    for row in _keel_rows(wheel, "splice"):
        seq, cls = row[:-1], row[-1]
        if any(b not in code for b in seq):
            continue
        X.append([bit for b in seq for bit in code[b]])
        labels.append(classes[cls])
    write(out / "dna.scale.gz", labels, np.array(X, dtype=float))


def letter(wheel: Path, out: Path) -> None:
    rows = _keel_rows(wheel, "letter")
    X = scale(np.array([[float(v) for v in r[:-1]] for r in rows]))
    labels = [ord(r[-1]) - ord("A") + 1 for r in rows]
    write(out / "letter.scale.gz", labels, X)


ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]
# continuous attribute -> number of bins
ADULT_BINS = {
    "age": 5, "fnlwgt": 5, "education-num": 5,
    "capital-gain": 2, "capital-loss": 2, "hours-per-week": 5,
}


def a9a(wheel: Path, out: Path) -> None:
    raw = member(wheel, "responsibly/dataset/adult/adult.data").decode()
    df = pd.read_csv(io.StringIO(raw), header=None, names=ADULT_COLUMNS,
                     skipinitialspace=True, na_values="?")
    df = df.dropna(subset=["income"])
    blocks = []
    for col in ADULT_COLUMNS[:-1]:
        v = df[col]
        if col in ADULT_BINS:
            if ADULT_BINS[col] == 2:
                b = (v > 0).astype(int)
            else:
                edges = np.quantile(v, np.linspace(0, 1, ADULT_BINS[col] + 1)[1:-1])
                b = np.searchsorted(edges, v, side="right")
            blocks.append(np.eye(ADULT_BINS[col])[b])
        else:
            cats = sorted(v.dropna().unique())
            onehot = np.zeros((len(v), len(cats)))
            for j, c in enumerate(cats):
                onehot[:, j] = (v == c).to_numpy()
            blocks.append(onehot)
    X = np.hstack(blocks)
    labels = np.where(df["income"].str.startswith(">50K"), "+1", "-1")
    write(out / "a9a.gz", labels, X)
    print(f"  a9a width {X.shape[1]}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[1] / "tests" / "data")
    ap.add_argument("--wheels", type=Path, default=Path(tempfile.gettempdir()) / "gsaopt-wheels")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    w = fetch_wheels(args.wheels)
    breast_cancer(w["rdatasets"], args.out)
    madelon(w["Py_FS"], args.out)
    dna(w["keel_ds"], args.out)
    letter(w["keel_ds"], args.out)
    a9a(w["responsibly"], args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
