#!/usr/bin/env python3
"""Energy vs time.

For a sweep directory: one curve per eps and experiment.  For a directory
holding a single run.csv: that run's (monotone) energy curve.
Usage: energy.py <run_dir> <out.png>
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import common


def _plot_run(ax, csv_path: str, label: str) -> None:
    cols = common.read_csv_columns(csv_path)
    name = "energy" if "energy" in cols else "E_total"
    common.require_columns(cols, ["time", name], csv_path)
    ax.plot(cols["time"], cols[name], label=label)


def main(argv) -> None:
    run_dir, out_png = common.parse_args(argv, "energy")
    single = os.path.join(run_dir, "run.csv")
    sweeps = common.sweep_experiments(run_dir)
    if os.path.isfile(single):
        fig, axes = common.new_figure(1)
        _plot_run(axes[0], single, os.path.basename(run_dir.rstrip("/")))
        axes[0].set_title("energy vs time")
    elif sweeps:
        fig, axes = common.new_figure(len(sweeps))
        for ax, (name, eps_dirs) in zip(axes, sweeps):
            for eps, d in eps_dirs:
                _plot_run(ax, os.path.join(d, "run.csv"), f"eps={eps:g}")
            ax.set_title(f"{name}: energy vs time")
    else:
        common.fail(f"no run.csv or sweep directories under {run_dir}")
    for ax in axes:
        ax.set_xlabel("t")
        ax.set_ylabel("E")
        ax.legend()
    common.save(fig, out_png)


if __name__ == "__main__":
    main(sys.argv)
