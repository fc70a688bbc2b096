"""Acceptance gate: every primary criterion, evaluated on one full run of
the shipped acceptance suite (`okms check-all` with the default config).

Each test prints a single pass/fail line for its criterion.  The suite
itself runs once per session (a few minutes); all criteria read from the
report.json it produces.
"""

import json
import os
import subprocess
import sys

import pytest


@pytest.fixture(scope="session")
def suite(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("check_all")
    env = dict(os.environ, OKMS_OUT=str(outdir))
    proc = subprocess.run(
        [sys.executable, "-m", "okms.cli", "check-all"],
        env=env,
        capture_output=True,
        text=True,
        cwd=str(outdir),
    )
    report_path = outdir / "report.json"
    assert report_path.exists(), f"check-all produced no report: {proc.stderr[-2000:]}"
    report = json.loads(report_path.read_text())
    return proc, report, outdir


def _check(report, name):
    for c in report["checks"]:
        if c["name"] == name:
            return c
    raise AssertionError(f"report has no check named {name!r}")


def _emit(capsys, label, ok, detail=""):
    with capsys.disabled():
        print(f"[ACCEPTANCE] {label}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{label}: {detail}"


def test_sigma_constant(suite, capsys):
    _, report, _ = suite
    c = _check(report, "sigma_constant")
    ok = c["passed"] and abs(c["tables"]["value"][0] - 2.0 / 3.0) <= 1e-8
    _emit(capsys, "surface tension sigma = 2/3 +- 1e-8", ok)


def test_heteroclinic_energy(suite, capsys):
    _, report, _ = suite
    c = _check(report, "heteroclinic_energy")
    ok = c["passed"] and abs(c["tables"]["energy"][0] - 4.0 / 3.0) <= 1e-4
    _emit(capsys, "1D heteroclinic energy = 4/3 +- 1e-4", ok)


def test_mass_conservation(suite, capsys):
    _, report, _ = suite
    c = _check(report, "mass_conservation")
    box = c["tables"]["box_drift"][0]
    rad = c["tables"]["radial_drift"][0]
    ok = c["passed"] and box <= 1e-12 and rad <= 1e-8
    _emit(
        capsys,
        "mass drift <= 1e-12 (box) / 1e-8 (radial) over 1e4 steps",
        ok,
        f"box={box:.2e} radial={rad:.2e}",
    )


def test_energy_dissipation(suite, capsys):
    _, report, _ = suite
    c = _check(report, "energy_dissipation")
    rise = c["tables"]["max_energy_rise"][0]
    gap = c["tables"]["gap_dt"][0]
    ratio = c["tables"]["halving_ratio"][0]
    ok = c["passed"] and rise <= 1e-10 and gap <= 0.05 and 0.3 <= ratio <= 0.7
    _emit(
        capsys,
        "per-step energy monotone; identity gap <= 5% and halves with dt",
        ok,
        f"rise={rise:.1e} gap={gap:.2e} halving={ratio:.2f}",
    )


def test_sharp_oracle(suite, capsys):
    _, report, _ = suite
    c = _check(report, "sharp_oracle")
    ok = (
        c["passed"]
        and c["tables"]["velocity_error"][0] <= 1e-6
        and c["tables"]["volume_drift"][0] <= 1e-6
        and c["tables"]["rk4_order"][0] >= 3.5
    )
    _emit(
        capsys,
        "sharp two-sphere oracle velocities +-1e-6, volume +-1e-6, RK4 order >= 3.5",
        ok,
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_convergence_of_dynamics(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"convergence_lam{lam}")
    errs = c["tables"]["sup_radius_error"]
    smallest_eps = c["eps_list"][-1]
    ok = c["passed"] and errs[-1] <= 2.0 * smallest_eps
    _emit(
        capsys,
        f"radius error strictly decreasing, final <= 2*eps (lam={lam})",
        ok,
        f"errors={['%.2e' % e for e in errs]}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_well_preparedness(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"well_preparedness_lam{lam}")
    _emit(
        capsys,
        f"energy gap to sharp flow decreasing in eps (lam={lam})",
        c["passed"],
        f"gaps={['%.2e' % g for g in c['tables']['sup_energy_gap']]}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_multiplicity_negative_control(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"multiplicity_negative_control_lam{lam}")
    mults = c["tables"]["multiplicity"]
    ok = c["passed"] and all(abs(m - 3.0) <= 0.5 for m in mults)
    _emit(
        capsys,
        f"folded init fails well-preparedness with multiplicity 3 +- 0.5 (lam={lam})",
        ok,
        f"m={['%.2f' % m for m in mults]}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_equipartition(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"equipartition_lam{lam}")
    _emit(
        capsys,
        f"sup_t discrepancy decreasing in eps (lam={lam})",
        c["passed"],
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_de_giorgi_inequality(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"de_giorgi_lam{lam}")
    margin = c["tables"]["min_margin"][-1]
    ok = c["passed"] and margin >= 0.0
    _emit(
        capsys,
        f"dissipation >= 0.9 * H^1/2 norm of Gibbs-Thomson data (lam={lam})",
        ok,
        f"margin={margin:.3e}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_gibbs_thomson(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"gibbs_thomson_lam{lam}")
    order = c["tables"]["fitted_order"]
    order = order[0] if isinstance(order, list) else order
    ok = c["passed"] and order >= 0.8
    _emit(
        capsys,
        f"Gibbs-Thomson plateau error fitted order >= 0.8 with matching signs (lam={lam})",
        ok,
        f"order={order:.2f}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_velocity_lower_bound(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"velocity_lower_bound_lam{lam}")
    lhs = c["tables"]["lhs_integral"][-1]
    rhs4 = c["tables"]["rhs_integral_x4"][-1]
    ok = c["passed"] and lhs >= rhs4 * 0.85
    _emit(
        capsys,
        f"time-derivative H^-1 mass >= 4x surface velocity norm * 0.85 (lam={lam})",
        ok,
        f"lhs={lhs:.3e} 4*rhs={rhs4:.3e}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_transport_estimate(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"transport_lam{lam}")
    ratios = c["tables"]["residual_ratio"]
    hs = c["tables"]["abs_h_well_prepared"]
    ok = c["passed"] and ratios[-1] <= 0.10 and hs[-1] <= 1e-2
    _emit(
        capsys,
        f"transport residual ratio decreasing, <= 0.10; |h| decreasing, <= 1e-2 (lam={lam})",
        ok,
        f"ratio={ratios[-1]:.3e} h={hs[-1]:.3e}",
    )


@pytest.mark.parametrize("lam", ["0", "1"])
def test_deformation_checks(suite, capsys, lam):
    _, report, _ = suite
    c = _check(report, f"deformation_lam{lam}")
    ok = (
        c["passed"]
        and c["tables"]["velocity_gap"][-1] <= 0.10
        and c["tables"]["slope_gap"][-1] <= 0.10
    )
    _emit(
        capsys,
        f"deformation velocity/slope identity gaps decreasing, <= 10% (lam={lam})",
        ok,
    )


def test_check_all_exit_and_aggregate(suite, capsys):
    proc, report, outdir = suite
    ok = proc.returncode == 0 and report["all_passed"]
    _emit(
        capsys,
        "check-all exits 0 with every verdict passing",
        ok,
        f"exit={proc.returncode}",
    )
    # per-run artifacts land under the output root as documented
    for lam in ("0", "1"):
        assert (outdir / f"sweep_lam{lam}" / "ms.csv").exists()
        assert (outdir / f"sweep_lam{lam}" / "0.01" / "run.csv").exists()
