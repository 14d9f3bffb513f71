"""
GSA against tuned baselines on breast-cancer
============================================

GSA has nothing to tune.  SGD, Adadelta and SCSG each get a small grid, and
the harness prints the same kind of table the benchmark suite produces.

Run from the repository root; the data comes from ``tests/data``.
"""

from pathlib import Path

from gsaopt.bench import GridCell, GridConfig, RunConfig, run_grid

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"

base = RunConfig("breast-cancer_scale", passes=5, data_dir=str(DATA), eval_passes=(1, 5))

cells = [GridCell("gsa")]
cells += [GridCell("sgd", {"rate": r}) for r in (1.0, 0.1, 0.01)]
cells += [GridCell("adadelta", {"eps": e}) for e in (1e-4, 1e-6, 1e-8)]
cells += [GridCell("scsg", {"rate": 0.1, "batch_size": b}) for b in (16, 64)]

# %%
# Three seeds per cell: the table shows mean ± std.
result = run_grid(GridConfig(base, cells, repeats=3), jobs=2)
print(result.markdown())

# %%
# A rate far outside the grid: SGD gets noticeably worse, GSA has no rate to get wrong.
wild = run_grid(GridConfig(base, [GridCell("gsa"), GridCell("sgd", {"rate": 50.0})]))
for row in wild.rows:
    if row.pass_index == 5:
        print(f"{row.optimizer:>4} {row.hyperparams or '-':>10}  loss {row.loss:.4f}  diverged={row.diverged}")
