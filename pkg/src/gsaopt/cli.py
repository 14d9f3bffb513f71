"""``gsaopt`` command line: fetch, run, grid, parse-check, report."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, fetch
from .data import parse_libsvm

EPILOG = """\
Config files are INI.  Minimal run:

  [run]
  dataset = breast-cancer_scale   # registry name or a LIBSVM path
  optimizer = sgd
  passes = 5
  [hyperparams]
  rate = 0.1

Any key can be overridden with --set key=value (or --set section.key=value).
Environment: GSAOPT_CACHE sets the download cache, HTTPS_PROXY a proxy.
"""


def _cmd_fetch(args) -> int:
    names = list(args.names)
    if args.all:
        names = [n for n, e in fetch.REGISTRY.items() if args.full or not e.large]
    if not names:
        print("nothing to fetch; name datasets or pass --all", file=sys.stderr)
        return 2
    status = 0
    for name in names:
        entry = fetch.REGISTRY.get(name)
        if entry is not None and entry.large and not args.full:
            print(f"{name}: large dataset, skipped (use --full)", file=sys.stderr)
            continue
        try:
            local = fetch.fetch_dataset(name)
        except fetch.FetchError as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            status = 1
            continue
        print(f"{name}\t{local.train}\t{local.test or '-'}")
    return status


def _config(args):
    overrides = list(args.set or [])
    for key in ("passes", "seed", "output_dir", "data_dir"):
        v = getattr(args, key, None)
        if v is not None:
            overrides.append(f"{key}={v}")
    return bench.read_config(args.config, overrides)


def _cmd_run(args) -> int:
    cfg = _config(args)
    if isinstance(cfg, bench.GridConfig):
        cfg = cfg.base
    outcome = bench.run_outcome(cfg)
    bench.write_csv(bench.rows_for(cfg, outcome.records), sys.stdout)
    if args.save_model:
        bench.save_model(outcome.model, args.save_model)
    return 0


def _cmd_grid(args) -> int:
    cfg = _config(args)
    if not isinstance(cfg, bench.GridConfig):
        cfg = bench.GridConfig(cfg, [bench.GridCell(cfg.optimizer, cfg.hyperparams)])
    entry = fetch.REGISTRY.get(cfg.base.dataset)
    if entry is not None and entry.large and not args.full:
        print(f"{entry.name} is a large dataset; pass --full to run it", file=sys.stderr)
        return 2
    result = bench.run_grid(cfg, jobs=args.jobs)
    if args.csv:
        bench.emit_report(result.rows, args.csv, "csv")
    else:
        bench.write_csv(result.rows, sys.stdout)
    md = result.markdown()
    if args.markdown:
        Path(args.markdown).write_text(md, encoding="utf-8")
    else:
        print(md, file=sys.stderr if not args.csv else sys.stdout)
    return 1 if result.errors else 0


def _cmd_parse_check(args) -> int:
    status = 0
    for path in args.files:
        try:
            ds = parse_libsvm(path, add_bias=not args.no_bias, regression=args.regression)
        except (ValueError, OSError) as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            status = 1
            continue
        nnz = sum(s.features.nnz for s in ds.samples)
        print(f"{path}: {len(ds)} samples, {ds.n_features} features"
              f"{' (incl. bias)' if ds.has_bias else ''}, {ds.n_classes or 'real'} classes, "
              f"{nnz} nonzeros")
        if ds.label_map:
            print("  labels: " + ", ".join(f"{k}->{v}" for k, v in ds.label_map.items()))
    return status


def _cmd_report(args) -> int:
    rows = [r for path in args.csv for r in bench.read_csv_report(path)]
    if not rows:
        print("no rows", file=sys.stderr)
        return 1
    out = bench.render_markdown(rows)
    if args.gaps:
        out += "\n" + bench.render_gap_markdown(bench.gap_statistics(rows))
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gsaopt", description="Greedy Step Averaging benchmarks.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download registry datasets into the cache")
    p.add_argument("names", nargs="*", help="registry names")
    p.add_argument("--all", action="store_true", help="every desk-scale registry entry")
    p.add_argument("--full", action="store_true", help="include the large datasets")
    p.set_defaults(func=_cmd_fetch)

    def run_opts(q):
        q.add_argument("config", help="INI config file")
        q.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        q.add_argument("--passes", type=int)
        q.add_argument("--seed", type=int)
        q.add_argument("--output-dir", dest="output_dir", help="write per-run CSV, model and step trace here")
        q.add_argument("--data-dir", dest="data_dir", help="resolve registry names from this directory")

    p = sub.add_parser("run", help="train once, print per-pass CSV")
    run_opts(p)
    p.add_argument("--save-model", metavar="PATH")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("grid", help="run a grid of optimizer settings")
    run_opts(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel cells (default 1)")
    p.add_argument("--full", action="store_true", help="allow large datasets")
    p.add_argument("--csv", metavar="PATH", help="write CSV here instead of stdout")
    p.add_argument("--markdown", metavar="PATH", help="write the markdown table here")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("parse-check", help="validate LIBSVM files and print a summary")
    p.add_argument("files", nargs="+")
    p.add_argument("--no-bias", action="store_true")
    p.add_argument("--regression", action="store_true")
    p.set_defaults(func=_cmd_parse_check)

    p = sub.add_parser("report", help="render CSV results as markdown tables")
    p.add_argument("csv", nargs="+")
    p.add_argument("--gaps", action="store_true", help="append GSA-vs-best mean(Err) and #best rows")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (bench.ConfigError, FileNotFoundError, fetch.FetchError) as exc:
        print(f"gsaopt: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
