#!/usr/bin/env python3
"""Interface radius trajectories: diffuse curves per eps overlaid on the
shared sharp-interface reference.

Usage: radii.py <run_dir> <out.png>
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import common


def _plot_radii(ax, csv_path, style, label_prefix, color=None):
    cols = common.read_csv_columns(csv_path)
    common.require_columns(cols, ["time"], csv_path)
    names = common.radii_columns(cols)
    if not names:
        common.fail(f"missing column 'r_1' in {csv_path}")
    line = None
    for i, name in enumerate(names):
        pairs = [
            (t, v) for t, v in zip(cols["time"], cols[name]) if v is not None
        ]
        if not pairs:
            continue
        t, v = zip(*pairs)
        kwargs = {"color": line.get_color()} if line is not None else (
            {"color": color} if color else {}
        )
        (line,) = ax.plot(
            t, v, style, label=label_prefix if i == 0 else None, **kwargs
        )


def main(argv) -> None:
    run_dir, out_png = common.parse_args(argv, "radii")
    single = os.path.join(run_dir, "run.csv")
    sweeps = common.sweep_experiments(run_dir)
    if os.path.isfile(single):
        fig, axes = common.new_figure(1)
        _plot_radii(axes[0], single, "-", "diffuse")
        axes[0].set_title("interface radii")
    elif sweeps:
        fig, axes = common.new_figure(len(sweeps))
        for ax, (name, eps_dirs) in zip(axes, sweeps):
            for eps, d in eps_dirs:
                _plot_radii(ax, os.path.join(d, "run.csv"), "-", f"eps={eps:g}")
            ms = os.path.join(run_dir, name, "ms.csv")
            if os.path.isfile(ms):
                _plot_radii(ax, ms, "--", "sharp", color="black")
            ax.set_title(f"{name}: radii, diffuse vs sharp")
    else:
        common.fail(f"no run.csv or sweep directories under {run_dir}")
    for ax in axes:
        ax.set_xlabel("t")
        ax.set_ylabel("r")
        ax.legend()
    common.save(fig, out_png)


if __name__ == "__main__":
    main(sys.argv)
