"""Harness plumbing: plans, trend rules, velocity extensions, fast checks.

The slow paired sweeps are exercised end-to-end by the acceptance suite;
here only their building blocks and the sub-second checks run.
"""

import json

import numpy as np
import pytest

from okms import checks, phasefield, sharp
from okms.core import RadialGrid
from okms.errors import InadmissibleBumpError


class TestTrendRules:
    def test_strictly_decreasing(self):
        assert checks._strictly_decreasing([4.0, 3.0, 1.0])
        assert not checks._strictly_decreasing([4.0, 4.0, 1.0])
        assert not checks._strictly_decreasing([1.0, 2.0])

    def test_no_growth_trend(self):
        assert checks._no_growth_trend([1.0, 0.9, 1.1])  # 1.1 <= 1.25 * 1.0
        assert not checks._no_growth_trend([1.0, 0.9, 1.3])
        assert checks._no_growth_trend([1.0])


class TestSweepPlan:
    def test_descending_enforced(self):
        with pytest.raises(ValueError):
            checks.SweepPlan(eps_list=(0.01, 0.02))
        with pytest.raises(ValueError):
            checks.SweepPlan(eps_list=(0.02, -0.01))

    @pytest.mark.parametrize("eps", [0.08, 0.04, 0.02, 0.01])
    def test_grid_resolves_interface(self, eps):
        plan = checks.SweepPlan()
        grid = plan.grid_for(eps)
        assert grid.h <= eps / 8.0

    def test_cluster_tol_capped_by_geometry(self):
        plan = checks.SweepPlan()
        assert plan.cluster_tol(0.01) == pytest.approx(0.1)
        # at coarse eps the cap keeps distinct spheres from merging
        assert plan.cluster_tol(0.08) == pytest.approx(0.15)

    def test_params_step_within_stability_budget(self):
        plan = checks.SweepPlan()
        for eps in plan.eps_list:
            p = plan.params_for(eps)
            assert p.dt <= eps**3 / 8.0 + 1e-18
            assert p.t_end == plan.t_end


class TestCheckReport:
    def test_jsonable_round_trip(self):
        rep = checks.CheckReport("demo", [0.08, 0.04])
        rep.tables["vals"] = np.array([1.0, 2.0])
        rep.tolerances["tol"] = 0.1
        rep.passed = True
        rep.verdict = "ok"
        data = json.loads(json.dumps(rep.to_jsonable()))
        assert data["name"] == "demo"
        assert data["tables"]["vals"] == [1.0, 2.0]
        assert data["passed"] is True


class TestVelocityExtension:
    def test_matches_rates_on_spheres(self):
        grid = RadialGrid(3, 257)
        radii, rates = [0.4, 0.7], [2.0, -0.5]
        V = checks.velocity_extension(grid, radii, rates)
        for r, p in zip(radii, rates):
            # sampled on the mesh the bump peak is flattened by O((h/w)^2)
            assert np.interp(r, grid.r, V) == pytest.approx(p, abs=1e-2)

    def test_compact_support(self):
        grid = RadialGrid(3, 257)
        V = checks.velocity_extension(grid, [0.4, 0.7], [1.0, 1.0])
        w = checks._half_width([0.4, 0.7])
        r = grid.r
        outside = (np.abs(r - 0.4) >= w) & (np.abs(r - 0.7) >= w)
        assert np.all(V[outside] == 0.0)

    def test_half_width_includes_domain_edges(self):
        assert checks._half_width([0.4, 0.7]) == pytest.approx(0.3 / 4.0)
        assert checks._half_width([0.1, 0.7]) == pytest.approx(0.1 / 4.0)

    def test_corrected_velocity_zeroes_pairing(self):
        grid = RadialGrid(3, 513)
        eps = 0.02
        u = phasefield.well_prepared_init(grid, [0.4, 0.7], -1, eps)
        uprime = np.gradient(u.values, grid.h)
        fam = sharp.SphereFamily((0.4, 0.7), -1, 3)
        rates = sharp.sphere_velocities(fam, 0.0)
        Veps, h = checks.corrected_velocity(
            grid, uprime, fam.radii, rates, 0.4, 2.0 * checks._half_width([0.4, 0.7])
        )
        pairing = float(np.dot(grid.cell_weights(), uprime * Veps))
        assert abs(pairing) < 1e-12 * max(abs(h), 1.0)

    def test_inadmissible_bump_rejected(self):
        grid = RadialGrid(3, 513)
        eps = 0.02
        u = phasefield.well_prepared_init(grid, [0.4, 0.7], -1, eps)
        uprime = np.gradient(u.values, grid.h)
        fam = sharp.SphereFamily((0.4, 0.7), -1, 3)
        rates = sharp.sphere_velocities(fam, 0.0)
        with pytest.raises(InadmissibleBumpError):
            # phi supported where grad u vanishes pairs to nothing
            checks.corrected_velocity(
                grid, uprime, fam.radii, rates, 0.95, 0.02
            )


class TestBump:
    def test_shape_and_derivative(self):
        s = np.linspace(-1.5, 1.5, 301)
        b = checks._bump(s)
        assert b.max() == pytest.approx(1.0)
        assert np.all(b[np.abs(s) >= 1.0] == 0.0)
        d = 1e-6
        fd = (checks._bump(s + d) - checks._bump(s - d)) / (2 * d)
        np.testing.assert_allclose(checks._bump_prime(s), fd, atol=1e-5)


class TestFastChecks:
    def test_sigma(self):
        rep = checks.check_sigma()
        assert rep.passed
        assert rep.tables["value"][0] == pytest.approx(2.0 / 3.0, abs=1e-8)

    def test_heteroclinic(self):
        rep = checks.check_heteroclinic()
        assert rep.passed

    def test_sharp_oracle(self):
        rep = checks.check_sharp_oracle()
        assert rep.passed
        assert rep.tables["rk4_order"][0] >= 3.5

    def test_multiplicity_negative_control(self):
        plan = checks.SweepPlan()
        rep = checks.multiplicity_negative_control(plan)
        assert rep.passed
        for m in rep.tables["multiplicity"]:
            assert m == pytest.approx(3.0, abs=0.5)

    def test_deformation_identities(self):
        # initialization-only check: no time stepping involved
        plan = checks.SweepPlan(eps_list=(0.02, 0.01))
        rep = checks.deformation_checks(plan)
        assert rep.passed
        assert rep.tables["velocity_gap"][-1] <= 0.10
        assert rep.tables["slope_gap"][-1] <= 0.10
