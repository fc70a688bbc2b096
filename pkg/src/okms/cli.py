"""Command-line entry point: configuration ingestion, run orchestration,
and persistence for all experiments.

Exit codes: 0 success, 1 run failure (divergence or failed acceptance
checks), 2 usage or configuration error.  Diagnostics go to standard
error; only requested tables go to standard out.
"""

from __future__ import annotations

import argparse
import importlib.resources
import os
import sys

import numpy as np

from . import checks, dynamics, phasefield, sharp
from .config import Config, parse_config
from .core import SimParams
from .errors import ConfigError, DivergenceError, OkmsError

_FMT = "%.17g"


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(args) -> Config:
    path = args.config
    if path is None:
        # the shipped default configuration (two spheres in the unit 3-ball)
        path = str(importlib.resources.files("okms").joinpath("data/default.toml"))
        _log(f"no --config given; using shipped default {path}")
    return parse_config(path)


def _outdir(cfg: Config, sub: str | None = None) -> str:
    d = cfg.resolved_output_dir()
    if sub:
        d = os.path.join(d, sub)
    os.makedirs(d, exist_ok=True)
    return d


def _cmd_ok_run(args) -> int:
    cfg = _load(args)
    grid = cfg.geometry.grid()
    u0 = phasefield.well_prepared_init(
        grid, cfg.geometry.positions, cfg.geometry.innermost_sign, cfg.params.eps
    )
    outdir = _outdir(cfg, "ok-run")
    _log(
        f"ok-run: eps={cfg.params.eps:g} lam={cfg.params.lam:g} "
        f"dt={cfg.params.dt:g} t_end={cfg.params.t_end:g} -> {outdir}"
    )
    try:
        _, rec = dynamics.run_ok(u0, cfg.params, record_every=cfg.record_every)
    except DivergenceError as exc:
        _log(f"run failed: {exc}")
        exc.record.write_csv(os.path.join(outdir, "run.csv"))
        exc.record.write_meta(os.path.join(outdir, "run.json"), failed=str(exc))
        return 1
    rec.write_csv(os.path.join(outdir, "run.csv"))
    rec.write_meta(os.path.join(outdir, "run.json"), seed=cfg.seed)
    _log(f"wrote {outdir}/run.csv")
    return 0


def _cmd_ms_run(args) -> int:
    cfg = _load(args)
    fam = cfg.geometry.family()
    outdir = _outdir(cfg, "ms-run")
    _log(
        f"ms-run: radii={list(fam.radii)} lam={cfg.params.lam:g} "
        f"t_end={cfg.params.t_end:g} -> {outdir}"
    )
    _, rec = sharp.run_ms(
        fam, cfg.params.lam, cfg.params.t_end, record_every=cfg.record_every
    )
    rec.write_csv(os.path.join(outdir, "ms.csv"))
    rec.write_meta(os.path.join(outdir, "ms.json"), seed=cfg.seed)
    _log(f"wrote {outdir}/ms.csv ({rec.meta.get('stop_reason', 'completed')})")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    plan = checks.SweepPlan(
        eps_list=cfg.eps_list,
        family=cfg.geometry.family(),
        lam=cfg.params.lam,
        t_end=cfg.params.t_end,
        experiment=f"sweep_lam{cfg.params.lam:g}",
    )
    outdir = _outdir(cfg)
    _log(f"sweep: eps={list(plan.eps_list)} lam={plan.lam:g} jobs={args.jobs}")
    paired = checks.run_paired_sweep(plan, jobs=args.jobs)
    checks._write_sweep_artifacts(outdir, plan, paired)
    rep = checks.convergence_sweep(plan, paired)
    import json

    with open(os.path.join(outdir, "report.json"), "w") as fh:
        json.dump(
            {"checks": [rep.to_jsonable()], "all_passed": bool(rep.passed)},
            fh,
            indent=2,
        )
        fh.write("\n")
    _log(f"convergence: {rep.verdict}")
    failures = [eps for eps in plan.eps_list if paired[eps].failed]
    if failures:
        _log(f"diffuse runs failed at eps={failures}")
        return 1
    return 0


def _cmd_check_all(args) -> int:
    cfg = _load(args)
    outdir = _outdir(cfg)
    _log(f"check-all: writing artifacts and report.json under {outdir}")
    report = checks.run_full_suite(
        outdir,
        jobs=args.jobs,
        eps_list=cfg.eps_list,
        family=cfg.geometry.family(),
        t_end=cfg.params.t_end,
    )
    for rep in report["checks"]:
        status = "PASS" if rep["passed"] else "FAIL"
        _log(f"{status} {rep['name']}: {rep['verdict']}")
    if not report["all_passed"]:
        _log("check-all: FAILED")
        return 1
    _log("check-all: all checks passed")
    return 0


def _cmd_profile(args) -> int:
    eps = args.eps
    if eps <= 0:
        _log("--eps must be positive")
        return 2
    params = SimParams(eps=eps, lam=args.lam)
    d = np.linspace(-5.0 * eps, 5.0 * eps, 21)
    u = phasefield.optimal_profile(d, eps)
    print("distance,u,double_well")
    for di, ui in zip(d, u):
        print(",".join(_FMT % x for x in (di, ui, phasefield.double_well(ui))))
    from .core import BoxGrid

    grid = BoxGrid((1.0,), (max(1024, int(16 / eps)),))
    field = phasefield.well_prepared_init(grid, [0.5], -1, eps)
    e = phasefield.diffuse_energy(field, params)
    print(f"# heteroclinic_energy,{_FMT % e.total}")
    print(f"# surface_tension,{_FMT % phasefield.sigma_const()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="okms",
        description=(
            "Ohta-Kawasaki diffuse dynamics, sharp nonlocal Mullins-Sekerka "
            "radial dynamics, and the verification harness pairing them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, jobs=False, config=True):
        p = sub.add_parser(name, help=help_text)
        if config:
            p.add_argument("--config", help="TOML configuration file")
        if jobs:
            p.add_argument(
                "--jobs",
                type=int,
                default=os.cpu_count() or 1,
                help="parallel per-eps jobs (default: processor count)",
            )
        p.set_defaults(fn=fn)
        return p

    add("ok-run", _cmd_ok_run, "run the diffuse Ohta-Kawasaki flow")
    add("ms-run", _cmd_ms_run, "run the sharp Mullins-Sekerka radial flow")
    add("sweep", _cmd_sweep, "paired eps-sweep with convergence report", jobs=True)
    add("check-all", _cmd_check_all, "run the full acceptance suite", jobs=True)
    p = add("profile", _cmd_profile, "print profile/energy table", config=False)
    p.add_argument("--eps", type=float, required=True, help="interface width")
    p.add_argument("--lam", type=float, default=0.0, help="nonlocal strength")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConfigError as exc:
        _log(f"configuration error: {exc}")
        return 2
    except OkmsError as exc:
        _log(f"run failed: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
