#!/usr/bin/env python3
"""Inequality/identity gaps vs eps from the acceptance report, one marker
per eps on a logarithmic eps axis (these should trend down to the left).

Usage: gaps.py <run_dir> <out.png>
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import common

# (check name, table) pairs rendered per lam suffix found in the report
GAP_TABLES = [
    ("convergence", "sup_radius_error"),
    ("well_preparedness", "sup_energy_gap"),
    ("equipartition", "sup_discrepancy"),
    ("gibbs_thomson", "plateau_error"),
    ("deformation", "velocity_gap"),
    ("deformation", "slope_gap"),
]


def main(argv) -> None:
    run_dir, out_png = common.parse_args(argv, "gaps")
    path = os.path.join(run_dir, "report.json")
    report = common.load_report(run_dir)
    suffixes = sorted(
        {
            c["name"].rsplit("_lam", 1)[1]
            for c in report.get("checks", [])
            if "_lam" in c.get("name", "")
        }
    )
    if not suffixes:
        common.fail(f"missing check 'convergence_lam0' in {path}")
    fig, axes = common.new_figure(len(suffixes))
    for ax, lam in zip(axes, suffixes):
        for base, table in GAP_TABLES:
            check = common.find_check(report, f"{base}_lam{lam}", path)
            vals = common.require_table(check, table, path)
            eps = check["eps_list"]
            ax.plot(eps, vals, "o-", label=f"{base}:{table}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("eps")
        ax.set_ylabel("gap")
        ax.set_title(f"gaps vs eps (lam={lam})")
        ax.legend(fontsize=8)
    common.save(fig, out_png)


if __name__ == "__main__":
    main(sys.argv)
