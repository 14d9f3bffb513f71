import bz2
import io

import pytest

from gsaopt import fetch
from gsaopt.fetch import REGISTRY, ChecksumMismatch, DatasetEntry, FetchError, RemoteFile, fetch_dataset

PAYLOAD = b"+1 1:1\n-1 2:1\n"


class FakeNet:
    def __init__(self, body=PAYLOAD):
        self.body = body
        self.urls = []

    def __call__(self, url):
        self.urls.append(url)
        return io.BytesIO(self.body)


def registry(**kw):
    e = DatasetEntry("toy", RemoteFile("binary/toy", kw.get("sha")), None, 2, 5)
    b = DatasetEntry("toyz", RemoteFile("binary/toyz.bz2"), RemoteFile("binary/toyz.t.bz2"), 2, 5)
    return {"toy": e, "toyz": b}


def test_registry_covers_benchmark_tables():
    assert len(REGISTRY) >= 16
    for name in ("w1a", "breast-cancer_scale", "a9a", "madelon", "dna.scale", "letter.scale",
                 "usps", "protein", "cod-rna", "gisette_scale", "mnist.scale", "news20.scale",
                 "aloi.scale", "sector.scale", "rcv1.multiclass", "url"):
        assert name in REGISTRY
        assert REGISTRY[name].train.url.startswith("https://")
    large = {n for n, e in REGISTRY.items() if e.large}
    assert large == {"url", "rcv1.multiclass", "news20.scale", "aloi.scale", "mnist.scale", "sector.scale"}


def test_second_fetch_is_offline(tmp_path):
    net = FakeNet()
    a = fetch_dataset("toy", registry(), tmp_path, net)
    assert a.train.read_bytes() == PAYLOAD and len(net.urls) == 1
    b = fetch_dataset("toy", registry(), tmp_path, lambda url: pytest.fail("network touched"))
    assert b.train == a.train
    assert (tmp_path / "toy.sha256").exists()


def test_pinned_checksum_mismatch(tmp_path):
    with pytest.raises(ChecksumMismatch):
        fetch_dataset("toy", registry(sha="0" * 64), tmp_path, FakeNet())


def test_pinned_checksum_ok(tmp_path):
    sha = __import__("hashlib").sha256(PAYLOAD).hexdigest()
    assert fetch_dataset("toy", registry(sha=sha), tmp_path, FakeNet()).train.exists()


def test_tampered_cache_refused(tmp_path):
    local = fetch_dataset("toy", registry(), tmp_path, FakeNet())
    local.train.write_bytes(b"+1 1:2\n")
    with pytest.raises(ChecksumMismatch):
        fetch_dataset("toy", registry(), tmp_path, FakeNet())


def test_bz2_decompressed(tmp_path):
    local = fetch_dataset("toyz", registry(), tmp_path, FakeNet(bz2.compress(PAYLOAD)))
    assert local.train.name == "toyz" and local.test.name == "toyz.t"
    assert local.train.read_bytes() == PAYLOAD


def test_network_failure(tmp_path):
    def broken(url):
        raise OSError("unreachable")

    with pytest.raises(FetchError):
        fetch_dataset("toy", registry(), tmp_path, broken)
    assert not list(tmp_path.iterdir())


def test_unknown_name(tmp_path):
    with pytest.raises(FetchError, match="unknown dataset"):
        fetch_dataset("nope", registry(), tmp_path, FakeNet())


def test_cache_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv(fetch.CACHE_ENV, str(tmp_path))
    assert fetch.cache_dir() == tmp_path
