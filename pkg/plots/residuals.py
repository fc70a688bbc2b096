#!/usr/bin/env python3
"""Transport residual diagnostics vs eps from the acceptance report:
the H^-1 residual ratio and the correction size |h|, log-eps axes.

Usage: residuals.py <run_dir> <out.png>
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import common

TABLES = ["residual_ratio", "abs_h_well_prepared", "max_abs_h_evolved"]


def main(argv) -> None:
    run_dir, out_png = common.parse_args(argv, "residuals")
    path = os.path.join(run_dir, "report.json")
    report = common.load_report(run_dir)
    suffixes = sorted(
        {
            c["name"].rsplit("_lam", 1)[1]
            for c in report.get("checks", [])
            if c.get("name", "").startswith("transport_lam")
        }
    )
    if not suffixes:
        common.fail(f"missing check 'transport_lam0' in {path}")
    fig, axes = common.new_figure(len(suffixes))
    for ax, lam in zip(axes, suffixes):
        check = common.find_check(report, f"transport_lam{lam}", path)
        eps = check["eps_list"]
        for table in TABLES:
            vals = common.require_table(check, table, path)
            ax.plot(eps, vals, "o-", label=table)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("eps")
        ax.set_title(f"transport residuals (lam={lam})")
        ax.legend(fontsize=8)
    common.save(fig, out_png)


if __name__ == "__main__":
    main(sys.argv)
