"""Shared plumbing for the figure scripts.

The scripts consume only the documented artifacts of a run directory:
per-run CSV time series (``run.csv`` / ``ms.csv``) and the acceptance
report (``report.json``).  Nothing is recomputed; missing inputs or
missing columns abort with a nonzero exit naming what is absent.
"""

from __future__ import annotations

import csv
import json
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGSIZE = (7.0, 5.0)
DPI = 150


def fail(message: str) -> None:
    print(message, file=sys.stderr)
    sys.exit(1)


def parse_args(argv, kind: str):
    if len(argv) != 3:
        fail(f"usage: {kind}.py <run_dir> <out.png>")
    run_dir, out_png = argv[1], argv[2]
    if not os.path.isdir(run_dir):
        fail(f"run directory not found: {run_dir}")
    return run_dir, out_png


def read_csv_columns(path: str) -> dict:
    """CSV as {column: list of float-or-None}; empty cells become None."""
    if not os.path.isfile(path):
        fail(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            fail(f"empty CSV: {path}")
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name in cols:
                cell = row.get(name, "")
                cols[name].append(float(cell) if cell not in ("", None) else None)
    return cols


def require_columns(cols: dict, needed, path: str) -> None:
    for name in needed:
        if name not in cols:
            fail(f"missing column '{name}' in {path}")


def radii_columns(cols: dict) -> list:
    return sorted(
        (n for n in cols if n.startswith("r_")), key=lambda n: int(n.split("_")[1])
    )


def load_report(run_dir: str) -> dict:
    path = os.path.join(run_dir, "report.json")
    if not os.path.isfile(path):
        fail(f"missing input file: {path}")
    with open(path) as fh:
        return json.load(fh)


def find_check(report: dict, name: str, path: str) -> dict:
    for c in report.get("checks", []):
        if c.get("name") == name:
            return c
    fail(f"missing check '{name}' in {path}")


def require_table(check: dict, table: str, path: str):
    tables = check.get("tables", {})
    if table not in tables:
        fail(f"missing column '{table}' in check '{check.get('name')}' of {path}")
    return tables[table]


def sweep_experiments(run_dir: str) -> list:
    """(experiment_name, [(eps_value, eps_dir), ... descending]) per sweep."""
    out = []
    for entry in sorted(os.listdir(run_dir)):
        exp_dir = os.path.join(run_dir, entry)
        if not (entry.startswith("sweep") and os.path.isdir(exp_dir)):
            continue
        eps_dirs = []
        for sub in os.listdir(exp_dir):
            sub_dir = os.path.join(exp_dir, sub)
            if os.path.isdir(sub_dir):
                try:
                    eps_dirs.append((float(sub), sub_dir))
                except ValueError:
                    continue
        eps_dirs.sort(key=lambda p: -p[0])
        if eps_dirs:
            out.append((entry, eps_dirs))
    return out


def new_figure(n_axes: int = 1):
    fig, axes = plt.subplots(
        1, n_axes, figsize=(FIGSIZE[0] * n_axes, FIGSIZE[1]), squeeze=False
    )
    return fig, axes[0]


def save(fig, out_png: str) -> None:
    fig.tight_layout()
    fig.savefig(out_png, dpi=DPI)
    print(f"wrote {out_png}", file=sys.stderr)
