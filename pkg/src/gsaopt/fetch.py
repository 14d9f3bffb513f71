"""Dataset registry and cached HTTPS fetcher for the LIBSVM benchmark files.

Files land in ``$GSAOPT_CACHE`` (default ``~/.cache/gsaopt``).  Downloads go
through :mod:`urllib`, which honours ``HTTPS_PROXY``/``https_proxy``.
``.bz2`` archives are decompressed once after download.

Each entry may pin a SHA-256 of the decompressed file.  Entries without a
pinned digest are trusted on first download: the digest is recorded next
to the file (``<file>.sha256``) and every later fetch checks it.
"""
from __future__ import annotations

import bz2
import hashlib
import os
import shutil
import tempfile
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

BASE_URL = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets"
CACHE_ENV = "GSAOPT_CACHE"


class FetchError(RuntimeError):
    pass


class ChecksumMismatch(FetchError):
    pass


@dataclass(frozen=True)
class RemoteFile:
    path: str  # relative to BASE_URL
    sha256: Optional[str] = None

    @property
    def url(self) -> str:
        return f"{BASE_URL}/{self.path}"

    @property
    def local_name(self) -> str:
        name = self.path.rsplit("/", 1)[-1]
        return name[: -len(".bz2")] if name.endswith(".bz2") else name


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    train: RemoteFile
    test: Optional[RemoteFile]
    n_classes: int
    passes: int
    large: bool = False
    # only some sets are benchmarked against their official test file
    official_test: bool = True

    @property
    def model(self) -> str:
        return "logistic" if self.n_classes == 2 else "softmax"


def _e(name, train, test, n_classes, passes, large=False, official_test=True):
    return DatasetEntry(
        name,
        RemoteFile(train),
        RemoteFile(test) if test else None,
        n_classes,
        passes,
        large,
        official_test and test is not None,
    )


# Default pass counts per dataset for benchmark grids.
REGISTRY: dict[str, DatasetEntry] = {
    e.name: e
    for e in [
        _e("w1a", "binary/w1a", "binary/w1a.t", 2, 5),
        _e("breast-cancer_scale", "binary/breast-cancer_scale", None, 2, 5),
        _e("a9a", "binary/a9a", None, 2, 5),
        _e("madelon", "binary/madelon", "binary/madelon.t", 2, 20),
        _e("cod-rna", "binary/cod-rna", None, 2, 5),
        _e("gisette_scale", "binary/gisette_scale.bz2", "binary/gisette_scale.t.bz2", 2, 5),
        _e("url", "binary/url_combined.bz2", None, 2, 5, large=True),
        _e("dna.scale", "multiclass/dna.scale", "multiclass/dna.scale.t", 3, 10),
        _e("letter.scale", "multiclass/letter.scale", "multiclass/letter.scale.t", 26, 10),
        _e("usps", "multiclass/usps.bz2", "multiclass/usps.t.bz2", 10, 5),
        _e("protein", "multiclass/protein.bz2", "multiclass/protein.t.bz2", 3, 5),
        _e("mnist.scale", "multiclass/mnist.scale.bz2", None, 10, 5, large=True),
        _e("news20.scale", "multiclass/news20.scale.bz2", "multiclass/news20.t.scale.bz2", 20, 5, large=True),
        _e("aloi.scale", "multiclass/aloi.scale.bz2", None, 1000, 5, large=True),
        _e("sector.scale", "multiclass/sector/sector.scale.bz2", "multiclass/sector/sector.t.scale.bz2", 105, 10, large=True),
        _e("rcv1.multiclass", "multiclass/rcv1/rcv1_train.multiclass.bz2", "multiclass/rcv1/rcv1_test.multiclass.bz2", 53, 5, large=True),
    ]
}

DESK_SCALE = ("breast-cancer_scale", "w1a", "a9a", "madelon", "dna.scale", "letter.scale")


@dataclass(frozen=True)
class LocalDataset:
    entry: DatasetEntry
    train: Path
    test: Optional[Path]


def cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "gsaopt")


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _urlopen(url: str, timeout: float = 60.0):
    return urllib.request.urlopen(url, timeout=timeout)


def _verify(path: Path, remote: RemoteFile) -> None:
    sidecar = path.with_name(path.name + ".sha256")
    expected = remote.sha256
    if expected is None and sidecar.exists():
        expected = sidecar.read_text().split()[0]
    actual = sha256_of(path)
    if expected is None:
        sidecar.write_text(f"{actual}  {path.name}\n")
    elif actual != expected:
        raise ChecksumMismatch(
            f"{path}: sha256 {actual} does not match expected {expected}; refusing to use it"
        )


def _fetch_file(remote: RemoteFile, dest_dir: Path, opener: Callable) -> Path:
    target = dest_dir / remote.local_name
    if target.exists():
        _verify(target, remote)
        return target
    dest_dir.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dest_dir, prefix=".part-")
    try:
        try:
            with os.fdopen(fd, "wb") as out, opener(remote.url) as resp:
                shutil.copyfileobj(resp, out)
        except OSError as exc:
            raise FetchError(f"download of {remote.url} failed: {exc}") from exc
        if remote.path.endswith(".bz2"):
            plain = tmp + ".plain"
            with bz2.open(tmp, "rb") as src, open(plain, "wb") as out:
                shutil.copyfileobj(src, out)
            os.replace(plain, tmp)
        os.replace(tmp, target)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
    _verify(target, remote)
    return target


def fetch_dataset(
    name: str,
    registry: dict[str, DatasetEntry] = REGISTRY,
    cache: Optional[Path] = None,
    opener: Callable = _urlopen,
) -> LocalDataset:
    """Return local paths for a registry dataset, downloading what is missing."""
    try:
        entry = registry[name]
    except KeyError:
        raise FetchError(f"unknown dataset {name!r}; known: {', '.join(sorted(registry))}") from None
    root = Path(cache) if cache is not None else cache_dir()
    train = _fetch_file(entry.train, root, opener)
    test = _fetch_file(entry.test, root, opener) if entry.test else None
    return LocalDataset(entry, train, test)
