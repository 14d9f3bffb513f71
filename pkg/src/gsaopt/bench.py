"""Experiment runner: configs, single runs, grids, reports and model files.

A run is described by a :class:`RunConfig`; a grid by a :class:`GridConfig`
holding a base run plus a list of optimizer cells.  Both load from one INI
file (see ``read_config``), so a run is reproducible from the file and its
seed alone.  Reports are CSV rows (:class:`ReportRow`) that can be read back
and re-rendered as markdown tables with one row per optimizer setting and
one column per metric and pass.
"""
from __future__ import annotations

import configparser
import csv
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import baselines, fetch
from .data import Dataset, load_libsvm_pair, parse_libsvm, split_train_test
from .gsa import GsaConfig, gsa_train
from .metrics import MetricsRecord, evaluate
from .models import KINDS, LinearModel

OPTIMIZERS = ("gsa", "sgd", "adadelta", "scsg")
# required hyperparameters, in report order
HYPERPARAMS = {"gsa": (), "sgd": ("rate",), "adadelta": ("eps",), "scsg": ("rate", "batch_size")}
CSV_COLUMNS = (
    "dataset", "optimizer", "hyperparams", "seed", "pass",
    "loss", "precision", "auc", "elapsed_ms", "diverged",
)


class ConfigError(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


class ModelVersionError(ModelFormatError):
    pass


# --- configuration ----------------------------------------------------------


def _hyper_value(key: str, value):
    if key == "batch_size":
        v = int(value)
        if v < 1:
            raise ConfigError("batch_size must be a positive integer")
        return v
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    return v


def check_hyperparams(optimizer: str, hyperparams: Mapping) -> dict:
    if optimizer not in OPTIMIZERS:
        raise ConfigError(f"unknown optimizer {optimizer!r}; choose from {', '.join(OPTIMIZERS)}")
    need = HYPERPARAMS[optimizer]
    got = set(hyperparams)
    if got != set(need):
        missing, extra = set(need) - got, got - set(need)
        detail = []
        if missing:
            detail.append("missing " + ", ".join(sorted(missing)))
        if extra:
            detail.append("unexpected " + ", ".join(sorted(extra)))
        raise ConfigError(f"{optimizer}: " + "; ".join(detail))
    return {k: _hyper_value(k, hyperparams[k]) for k in need}


def format_hyperparams(optimizer: str, hyperparams: Mapping) -> str:
    """Canonical ``k=v;k=v`` text; empty for GSA."""
    return ";".join(f"{k}={hyperparams[k]!r}" for k in HYPERPARAMS[optimizer])


def parse_hyperparams(text: str) -> dict:
    out = {}
    for part in filter(None, text.replace(",", ";").replace(" ", ";").split(";")):
        if "=" not in part:
            raise ConfigError(f"hyperparameter {part!r} is not key=value")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    optimizer: str = "gsa"
    hyperparams: Mapping = field(default_factory=dict)
    passes: int = 5
    seed: int = 0
    model: Optional[str] = None  # None: logistic for 2 classes, softmax otherwise
    test: Optional[str] = None  # path of a test file; None: official test or split
    test_fraction: float = 0.2
    split_seed: Optional[int] = None  # None: follow seed
    eval_passes: Optional[tuple] = None  # None: every pass
    add_bias: bool = True
    output_dir: Optional[str] = None
    data_dir: Optional[str] = None  # look up registry names here instead of fetching
    precision_metric: str = "accuracy"
    gsa: GsaConfig = GsaConfig()

    def __post_init__(self):
        object.__setattr__(self, "hyperparams", check_hyperparams(self.optimizer, self.hyperparams))
        if int(self.passes) != self.passes or self.passes < 1:
            raise ConfigError("passes must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.model is not None and self.model not in KINDS:
            raise ConfigError(f"model must be one of {', '.join(KINDS)}")
        if self.eval_passes is not None:
            ep = tuple(sorted(set(int(p) for p in self.eval_passes)))
            if not ep or ep[0] < 1 or ep[-1] > self.passes:
                raise ConfigError("eval_passes must lie in 1..passes")
            object.__setattr__(self, "eval_passes", ep)
        if self.precision_metric not in ("accuracy", "average_precision"):
            raise ConfigError("precision_metric is 'accuracy' or 'average_precision'")

    @property
    def hyperparams_text(self) -> str:
        return format_hyperparams(self.optimizer, self.hyperparams)

    @property
    def dataset_label(self) -> str:
        name = os.path.basename(self.dataset)
        return name[:-3] if name.endswith(".gz") else name

    def with_cell(self, optimizer: str, hyperparams: Mapping) -> "RunConfig":
        return replace(self, optimizer=optimizer, hyperparams=dict(hyperparams))


@dataclass(frozen=True)
class GridCell:
    optimizer: str
    hyperparams: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "hyperparams", check_hyperparams(self.optimizer, self.hyperparams))

    @property
    def label(self) -> str:
        return format_hyperparams(self.optimizer, self.hyperparams)

    @classmethod
    def parse(cls, text: str) -> "GridCell":
        """``"sgd rate=0.1"`` or ``"scsg rate=1 batch_size=200"`` or ``"gsa"``."""
        head, _, rest = text.strip().partition(" ")
        return cls(head, parse_hyperparams(rest))


@dataclass(frozen=True)
class GridConfig:
    base: RunConfig
    grid: tuple
    repeats: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise ConfigError("grid must contain at least one cell")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")

    def runs(self) -> list[RunConfig]:
        """One run per (cell, repeat); repeat ``r`` uses seed ``base.seed + r``."""
        return [
            replace(self.base.with_cell(c.optimizer, c.hyperparams), seed=self.base.seed + r)
            for c in self.grid
            for r in range(self.repeats)
        ]


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _bool(v: str) -> bool:
    try:
        return _BOOL[str(v).strip().lower()]
    except KeyError:
        raise ConfigError(f"not a boolean: {v!r}") from None


_RUN_KEYS = {
    "dataset": str, "optimizer": str, "passes": int, "seed": int, "model": str,
    "test": str, "test_fraction": float, "split_seed": int, "add_bias": _bool,
    "output_dir": str, "data_dir": str, "precision_metric": str,
    "eval_passes": lambda v: tuple(int(p) for p in v.replace(",", " ").split()),
}
_GSA_KEYS = {"p_hat": float, "clamp_negative": _bool, "eta_max": float, "logistic_rule": str}


def _apply_overrides(cp: configparser.ConfigParser, overrides: Iterable[str]) -> None:
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not key=value")
        section, dot, name = key.strip().rpartition(".")
        section = section if dot else "run"
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, name, value.strip())


def read_config(path=None, overrides: Iterable[str] = (), text: Optional[str] = None):
    """Load a run or grid description; returns ``RunConfig`` or ``GridConfig``.

    ``overrides`` are ``key=value`` strings (``section.key=value`` for other
    sections than ``[run]``) applied on top of the file.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if text is not None:
        cp.read_string(text)
    elif path is not None:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    _apply_overrides(cp, overrides)
    if not cp.has_section("run"):
        raise ConfigError("config needs a [run] section")
    kw = {}
    for k, v in cp.items("run"):
        if k not in _RUN_KEYS:
            raise ConfigError(f"unknown key {k!r} in [run]")
        try:
            kw[k] = _RUN_KEYS[k](v)
        except ValueError as exc:
            raise ConfigError(f"[run] {k}: {exc}") from None
    if "dataset" not in kw:
        raise ConfigError("[run] needs a dataset")
    if cp.has_section("hyperparams"):
        kw["hyperparams"] = dict(cp.items("hyperparams"))
    if cp.has_section("gsa"):
        g = {}
        for k, v in cp.items("gsa"):
            if k not in _GSA_KEYS:
                raise ConfigError(f"unknown key {k!r} in [gsa]")
            g[k] = _GSA_KEYS[k](v)
        kw["gsa"] = GsaConfig(**g)
    if cp.has_section("grid"):
        cells = [GridCell.parse(line) for line in cp.get("grid", "cells", fallback="").splitlines() if line.strip()]
        repeats = cp.getint("grid", "repeats", fallback=1)
        kw.setdefault("optimizer", cells[0].optimizer if cells else "gsa")
        if kw["optimizer"] != "gsa" and "hyperparams" not in kw and cells:
            kw["hyperparams"] = cells[0].hyperparams
        return GridConfig(RunConfig(**kw), cells, repeats)
    return RunConfig(**kw)


# --- data -------------------------------------------------------------------


def _first_existing(directory: Path, name: str) -> Optional[Path]:
    for cand in (name, name + ".gz"):
        if (directory / cand).is_file():
            return directory / cand
    return None


def resolve_paths(config: RunConfig) -> tuple[Path, Optional[Path]]:
    """Train file and, if the run uses one, its separate test file."""
    test = Path(config.test) if config.test else None
    if os.path.exists(config.dataset):
        return Path(config.dataset), test
    entry = fetch.REGISTRY.get(config.dataset)
    if entry is None:
        raise FileNotFoundError(f"dataset {config.dataset!r} is neither a file nor a registry name")
    if config.data_dir:
        d = Path(config.data_dir)
        train = _first_existing(d, entry.train.local_name)
        if train is None:
            raise FileNotFoundError(f"{entry.train.local_name} not found in {d}")
        if test is None and entry.official_test:
            test = _first_existing(d, entry.test.local_name)
        return train, test
    local = fetch.fetch_dataset(config.dataset)
    if test is None and entry.official_test:
        test = local.test
    return local.train, test


@lru_cache(maxsize=8)
def _load(train: str, test: Optional[str], add_bias: bool, regression: bool,
          fraction: float, split_seed: int) -> tuple[Dataset, Dataset]:
    if test is not None:
        return load_libsvm_pair(train, test, add_bias, regression=regression)
    full = parse_libsvm(train, add_bias, regression=regression)
    return split_train_test(full, fraction, split_seed)


def load_data(config: RunConfig) -> tuple[Dataset, Dataset]:
    train, test = resolve_paths(config)
    split_seed = config.seed if config.split_seed is None else config.split_seed
    return _load(str(train), str(test) if test else None, config.add_bias,
                 config.model == "linear", config.test_fraction, split_seed)


# --- runs -------------------------------------------------------------------


@dataclass
class RunOutcome:
    records: list
    model: LinearModel
    trace: Optional[object] = None


def _train(config: RunConfig, model: LinearModel, train: Dataset, hook):
    h = config.hyperparams
    if config.optimizer == "gsa":
        _, _, trace = gsa_train(model, train, config.passes, config.seed, config.gsa, hook)
        return trace
    if config.optimizer == "sgd":
        baselines.sgd_train(model, train, config.passes, config.seed, baselines.SgdConfig(h["rate"]), hook)
    elif config.optimizer == "adadelta":
        baselines.adadelta_train(model, train, config.passes, config.seed, h["eps"], hook)
    else:
        cfg = baselines.ScsgConfig(h["rate"], h["batch_size"])
        baselines.scsg_train(model, train, config.passes, config.seed, cfg, hook)
    return None


def run_outcome(config: RunConfig) -> RunOutcome:
    train, test = load_data(config)
    kind = config.model or ("logistic" if train.n_classes == 2 else "softmax")
    if kind == "logistic" and train.n_classes != 2:
        raise ConfigError(f"logistic model needs 2 classes, dataset has {train.n_classes}")
    model = LinearModel.for_dataset(kind, train)
    wanted = set(config.eval_passes or range(1, config.passes + 1))
    records = []
    eval_time = 0.0
    start = time.perf_counter()

    def hook(k, m):
        nonlocal eval_time
        if k not in wanted:
            return
        t0 = time.perf_counter()
        elapsed_ms = (t0 - start - eval_time) * 1e3
        records.append(evaluate(m, test, k, elapsed_ms, config.precision_metric))
        eval_time += time.perf_counter() - t0

    trace = _train(config, model, train, hook)
    outcome = RunOutcome(records, model, trace)
    if config.output_dir:
        _write_outputs(config, outcome)
    return outcome


def run_experiment(config: RunConfig) -> list[MetricsRecord]:
    """Train as configured and return one record per evaluated pass."""
    return run_outcome(config).records


def _write_outputs(config: RunConfig, outcome: RunOutcome) -> None:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{config.dataset_label}-{config.optimizer}-{config.seed}"
    emit_report(rows_for(config, outcome.records), out / f"{stem}.csv", "csv")
    save_model(outcome.model, out / f"{stem}.model")
    if outcome.trace is not None:
        outcome.trace.to_csv(out / f"{stem}-steps.csv")


# --- report rows ------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    dataset: str
    optimizer: str
    hyperparams: str
    seed: int
    pass_index: int
    loss: float
    precision: Optional[float]
    auc: Optional[float]
    elapsed_ms: float
    diverged: bool

    def __eq__(self, other):
        if not isinstance(other, ReportRow):
            return NotImplemented
        return all(_same(getattr(self, f), getattr(other, f)) for f in self.__dataclass_fields__)

    __hash__ = None


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        return a == b or (math.isnan(a) and math.isnan(b))
    return a == b


def rows_for(config: RunConfig, records: Sequence[MetricsRecord]) -> list[ReportRow]:
    hp = config.hyperparams_text
    return [
        ReportRow(config.dataset_label, config.optimizer, hp, config.seed, r.pass_index,
                  r.loss, r.precision, r.auc, r.elapsed, r.diverged)
        for r in records
    ]


def failed_rows(config: RunConfig) -> list[ReportRow]:
    passes = config.eval_passes or range(1, config.passes + 1)
    return [
        ReportRow(config.dataset_label, config.optimizer, config.hyperparams_text, config.seed,
                  k, math.nan, None, None, 0.0, True)
        for k in passes
    ]


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def _parse_num(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def write_csv(rows: Sequence[ReportRow], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.dataset, r.optimizer, r.hyperparams, r.seed, r.pass_index, _num(r.loss),
                    _num(r.precision), _num(r.auc), f"{r.elapsed_ms:.3f}", str(r.diverged).lower()])


def read_csv_report(source) -> list[ReportRow]:
    own = not hasattr(source, "read")
    fh = open(source, newline="", encoding="utf-8") if own else source
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header!r}")
        return [
            ReportRow(d, o, h, int(s), int(p), float(loss), _parse_num(prec), _parse_num(auc),
                      float(el), div == "true")
            for d, o, h, s, p, loss, prec, auc, el, div in reader
        ]
    finally:
        if own:
            fh.close()


# --- aggregation and markdown -----------------------------------------------


METRICS = ("loss", "precision", "auc")


@dataclass
class CellSummary:
    dataset: str
    optimizer: str
    hyperparams: str
    n_runs: int
    # metric -> pass -> (mean, sample std or nan)
    stats: dict
    diverged: dict  # pass -> any run diverged


def _mean_std(values: list) -> tuple[float, float]:
    a = np.asarray(values, dtype=float)
    std = float(np.std(a, ddof=1)) if a.size > 1 else math.nan
    return float(np.mean(a)), std


def summarize(rows: Sequence[ReportRow]) -> list[CellSummary]:
    """Group rows by (dataset, optimizer, hyperparams), keeping first-seen order."""
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.dataset, r.optimizer, r.hyperparams), []).append(r)
    out = []
    for (d, o, h), rs in groups.items():
        passes = sorted({r.pass_index for r in rs})
        stats, diverged = {m: {} for m in METRICS}, {}
        for p in passes:
            at = [r for r in rs if r.pass_index == p]
            diverged[p] = any(r.diverged for r in at)
            for m in METRICS:
                vals = [getattr(r, m) for r in at if getattr(r, m) is not None]
                if vals:
                    stats[m][p] = _mean_std(vals)
        out.append(CellSummary(d, o, h, len({r.seed for r in rs}), stats, diverged))
    return out


def _better(metric: str):
    return min if metric == "loss" else max


def _columns(cells: Sequence[CellSummary]) -> list[tuple[str, int]]:
    cols = []
    for m in METRICS:
        passes = sorted({p for c in cells for p in c.stats[m]})
        cols += [(m, p) for p in passes]
    return cols


def _usable(cell: CellSummary, metric: str, p: int) -> Optional[float]:
    if p not in cell.stats[metric]:
        return None
    if metric == "loss" and cell.diverged.get(p):
        return None
    v = cell.stats[metric][p][0]
    return v if math.isfinite(v) else None


def best_per_column(cells: Sequence[CellSummary]) -> dict:
    best = {}
    for m, p in _columns(cells):
        vals = [v for c in cells if (v := _usable(c, m, p)) is not None]
        if vals:
            best[(m, p)] = _better(m)(vals)
    return best


_SHORT = {"loss": "loss", "precision": "prec.", "auc": "auc"}


def render_markdown(rows: Sequence[ReportRow]) -> str:
    """Table per dataset: rows are optimizer settings, columns metric@pass.

    The best value of each column is bold; a diverged loss reads ``nan``.
    With repeats a cell shows ``mean ± std``.
    """
    if not rows:
        raise ValueError("no records to report")
    cells = summarize(rows)
    parts = []
    for dataset in dict.fromkeys(c.dataset for c in cells):
        group = [c for c in cells if c.dataset == dataset]
        cols = _columns(group)
        best = best_per_column(group)
        header = ["Algo.", "hyper-para."] + [f"{_SHORT[m]}@{p}" for m, p in cols]
        lines = [f"### test on {dataset}", "",
                 "| " + " | ".join(header) + " |",
                 "|" + "|".join(["---"] * 2 + ["---:"] * len(cols)) + "|"]
        for c in group:
            out = [c.optimizer.upper() if c.optimizer == "gsa" else c.optimizer, c.hyperparams.replace(";", ", ")]
            for m, p in cols:
                if p not in c.stats[m]:
                    out.append("")
                    continue
                mean, std = c.stats[m][p]
                if m == "loss" and c.diverged.get(p):
                    out.append("nan")
                    continue
                text = f"{mean:.3f}" if math.isnan(std) else f"{mean:.3f} ± {std:.3f}"
                if (m, p) in best and mean == best[(m, p)]:
                    text = f"**{text}**"
                out.append(text)
            lines.append("| " + " | ".join(out) + " |")
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"


def gap_statistics(rows: Sequence[ReportRow]) -> dict:
    """Per column ``(metric, pass)``: mean over datasets of GSA minus the best
    value in that dataset's grid, and the number of datasets where GSA is best.

    Columns are matched by position (first, second, last pass) so datasets
    run for different pass counts can be pooled.
    """
    cells = summarize(rows)
    err: dict = {}
    wins: dict = {}
    for dataset in dict.fromkeys(c.dataset for c in cells):
        group = [c for c in cells if c.dataset == dataset]
        gsa = next((c for c in group if c.optimizer == "gsa"), None)
        if gsa is None:
            continue
        best = best_per_column(group)
        for m in METRICS:
            passes = sorted(p for (mm, p) in best if mm == m)
            for slot, p in _slots(passes):
                v = _usable(gsa, m, p)
                if v is None:
                    continue
                err.setdefault((m, slot), []).append(v - best[(m, p)])
                wins[(m, slot)] = wins.get((m, slot), 0) + (v == best[(m, p)])
    return {k: (float(np.mean(v)), wins[k]) for k, v in err.items()}


def _slots(passes: list) -> list:
    if not passes:
        return []
    named = [("first", passes[0])]
    if len(passes) > 1:
        named.append(("second", passes[1]))
    if len(passes) > 2:
        named.append(("last", passes[-1]))
    return named


def render_gap_markdown(stats: dict) -> str:
    keys = sorted(stats, key=lambda k: (METRICS.index(k[0]), ["first", "second", "last"].index(k[1])))
    header = "| | " + " | ".join(f"{_SHORT[m]}@{s}" for m, s in keys) + " |"
    sep = "|---|" + "---:|" * len(keys)
    err = "| mean(Err) | " + " | ".join(f"{stats[k][0]:.4f}" for k in keys) + " |"
    wins = "| #best | " + " | ".join(str(stats[k][1]) for k in keys) + " |"
    return "\n".join([header, sep, err, wins]) + "\n"


def emit_report(rows: Sequence[ReportRow], path, fmt: str = "csv") -> Path:
    """Write rows to ``path`` as ``csv`` or ``markdown``."""
    if not rows:
        raise ValueError("no records to report")
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, fh)
    elif fmt == "markdown":
        path.write_text(render_markdown(rows), encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return path


# --- grids ------------------------------------------------------------------


def _run_cell(config: RunConfig) -> tuple[list, Optional[str]]:
    try:
        return rows_for(config, run_experiment(config)), None
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return failed_rows(config), f"{type(exc).__name__}: {exc}"


@dataclass
class GridResult:
    rows: list
    errors: list  # (config, message) for cells that raised

    @property
    def summary(self) -> list[CellSummary]:
        return summarize(self.rows)

    def markdown(self) -> str:
        return render_markdown(self.rows)


def run_grid(config: GridConfig, jobs: int = 1) -> GridResult:
    """Run every (cell, repeat) and collect rows in grid order.

    Cells are independent, so ``jobs > 1`` runs them in a process pool; a
    cell that raises is reported as diverged and the grid continues.
    """
    runs = config.runs()
    if jobs > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(runs))) as pool:
            results = list(pool.map(_run_cell, runs))
    else:
        results = [_run_cell(r) for r in runs]
    rows, errors = [], []
    for run, (cell_rows, err) in zip(runs, results):
        rows.extend(cell_rows)
        if err is not None:
            errors.append((run, err))
            print(f"cell {run.optimizer} {run.hyperparams_text} seed {run.seed} failed: {err}",
                  file=sys.stderr)
    return GridResult(rows, errors)


# --- model files ------------------------------------------------------------


MODEL_HEADER = "gsa-model v1"


def save_model(model: LinearModel, path) -> None:
    """Text model: header, ``<kind> <L> <p> <has_bias>``, then L rows of p values."""
    L, p = model.weights.shape
    lines = [MODEL_HEADER, f"{model.kind} {L} {p} {int(model.has_bias)}"]
    lines += [" ".join(format(float(v), ".17g") for v in row) for row in model.weights]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_model(path) -> LinearModel:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if not lines or not lines[0].startswith("gsa-model "):
        raise ModelFormatError("not a gsa-model file")
    if lines[0].strip() != MODEL_HEADER:
        raise ModelVersionError(f"unsupported model version {lines[0].split(' ', 1)[1]!r}")
    try:
        kind, L, p, bias = lines[1].split()
        L, p = int(L), int(p)
    except (IndexError, ValueError):
        raise ModelFormatError("malformed shape line") from None
    if bias not in ("0", "1"):
        raise ModelFormatError(f"has_bias must be 0 or 1, got {bias!r}")
    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != L:
        raise ModelFormatError(f"expected {L} weight rows, found {len(rows)}")
    W = np.empty((L, p))
    for i, ln in enumerate(rows):
        vals = ln.split()
        if len(vals) != p:
            raise ModelFormatError(f"row {i + 1} has {len(vals)} values, expected {p}")
        try:
            W[i] = [float(v) for v in vals]
        except ValueError as exc:
            raise ModelFormatError(f"row {i + 1}: {exc}") from None
    try:
        return LinearModel(kind, W, bias == "1")
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None
