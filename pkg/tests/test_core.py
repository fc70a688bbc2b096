"""Grids, quadrature, parameters, and run-record persistence."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from okms.core import (
    BoxGrid,
    RadialGrid,
    RunRecord,
    ScalarField,
    SimParams,
    field_mean,
    quadrature_integral,
    unit_sphere_area,
)
from okms.errors import GridMismatchError


def test_unit_sphere_area_known_values():
    assert unit_sphere_area(2) == pytest.approx(2.0 * math.pi, abs=1e-14)
    assert unit_sphere_area(3) == pytest.approx(4.0 * math.pi, abs=1e-14)
    # degenerate slab case: S^0 has two points
    assert unit_sphere_area(1) == pytest.approx(2.0, abs=1e-14)


class TestBoxGrid:
    def test_midpoint_nodes(self):
        g = BoxGrid((1.0,), (8,))
        assert g.spacing == (0.125,)
        np.testing.assert_allclose(g.axis_nodes(0), (np.arange(8) + 0.5) * 0.125)

    def test_two_dim(self):
        g = BoxGrid((1.0, 2.0), (8, 16))
        assert g.dim == 2
        assert g.shape == (8, 16)
        assert g.cell_volume == pytest.approx(0.125 * 0.125)

    def test_invalid(self):
        with pytest.raises(GridMismatchError):
            BoxGrid((1.0, 1.0, 1.0), (8, 8, 8))  # only dim 1 and 2
        with pytest.raises(GridMismatchError):
            BoxGrid((1.0,), (4,))  # too few cells
        with pytest.raises(GridMismatchError):
            BoxGrid((-1.0,), (8,))


class TestRadialGrid:
    def test_nodes_span_closed_interval(self):
        g = RadialGrid(3, 65)
        assert g.r[0] == 0.0 and g.r[-1] == 1.0
        assert g.h == pytest.approx(1.0 / 64.0)

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_cell_weights_sum_to_ball_volume(self, dim):
        g = RadialGrid(dim, 129)
        assert g.cell_weights().sum() == pytest.approx(g.volume, rel=1e-14)

    def test_weights_positive(self):
        g = RadialGrid(3, 65)
        assert np.all(g.cell_weights() > 0.0)

    def test_invalid(self):
        with pytest.raises(GridMismatchError):
            RadialGrid(0, 65)
        with pytest.raises(GridMismatchError):
            RadialGrid(3, 10)
        with pytest.raises(GridMismatchError):
            RadialGrid(3, 65, radius=2.0)


class TestQuadrature:
    def test_box_constant(self):
        g = BoxGrid((2.0,), (32,))
        f = ScalarField(g, np.full(32, 3.0))
        assert quadrature_integral(f) == pytest.approx(6.0, rel=1e-14)
        assert field_mean(f) == pytest.approx(3.0, rel=1e-14)

    def test_box_midpoint_rule_exact_for_linear(self):
        g = BoxGrid((1.0,), (32,))
        f = ScalarField(g, 5.0 * g.axis_nodes(0) - 2.0)
        assert quadrature_integral(f) == pytest.approx(0.5, rel=1e-13)

    def test_radial_constant(self):
        g = RadialGrid(3, 65)
        f = ScalarField(g, np.ones(65))
        assert quadrature_integral(f) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)
        assert field_mean(f) == pytest.approx(1.0, rel=1e-14)

    def test_radial_polynomial(self):
        # int_B r^2 = 4*pi/5 in R^3; finite-volume weights are second order
        g = RadialGrid(3, 513)
        f = ScalarField(g, g.r**2)
        assert quadrature_integral(f) == pytest.approx(4.0 * math.pi / 5.0, rel=1e-5)

    @given(
        a=st.floats(-5, 5),
        b=st.floats(-5, 5),
        seed=st.integers(0, 2**31 - 1),
    )
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, a, b, seed):
        g = RadialGrid(3, 65)
        rng = np.random.default_rng(seed)
        f = rng.standard_normal(65)
        h = rng.standard_normal(65)
        lhs = quadrature_integral(ScalarField(g, a * f + b * h))
        rhs = a * quadrature_integral(ScalarField(g, f)) + b * quadrature_integral(
            ScalarField(g, h)
        )
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


class TestScalarField:
    def test_shape_mismatch(self):
        g = BoxGrid((1.0,), (8,))
        with pytest.raises(GridMismatchError):
            ScalarField(g, np.zeros(9))

    def test_nonfinite_rejected(self):
        g = BoxGrid((1.0,), (8,))
        with pytest.raises(GridMismatchError):
            ScalarField(g, np.full(8, np.nan))

    def test_from_function_radial(self):
        g = RadialGrid(2, 65)
        f = ScalarField.from_function(g, lambda r: r**2)
        np.testing.assert_allclose(f.values, g.r**2)


class TestSimParams:
    def test_default_dt_clamp(self):
        assert SimParams(eps=0.5).dt == pytest.approx(1.0e-3)  # eps^3 capped above
        assert SimParams(eps=0.04).dt == pytest.approx(0.04**3)
        assert SimParams(eps=1.0e-3).dt == pytest.approx(1.0e-8)  # clamped below

    def test_default_stabilization(self):
        assert SimParams(eps=0.1).stabilization == pytest.approx(133.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            SimParams(eps=-0.1)
        with pytest.raises(ValueError):
            SimParams(eps=0.1, lam=-1.0)
        with pytest.raises(ValueError):
            SimParams(eps=0.1, dt=0.0)
        with pytest.raises(ValueError):
            SimParams(eps=0.1, target_mass=1.5)


class TestRunRecord:
    def test_append_and_columns(self):
        rec = RunRecord()
        rec.append(0.0, radii=[0.4, 0.7], energy=1.0)
        rec.append(0.1, radii=[0.39], energy=0.9)
        np.testing.assert_allclose(rec.t, [0.0, 0.1])
        np.testing.assert_allclose(rec.column("energy"), [1.0, 0.9])
        m = rec.radii_matrix()
        assert m.shape == (2, 2)
        assert np.isnan(m[1, 1])

    def test_times_strictly_increasing(self):
        rec = RunRecord()
        rec.append(0.0, energy=1.0)
        with pytest.raises(ValueError):
            rec.append(0.0, energy=0.9)

    def test_csv_round_trip_full_precision(self, tmp_path):
        rec = RunRecord()
        vals = [1.0 / 3.0, math.pi * 1e-7]
        rec.append(0.0, radii=[0.4], energy=vals[0])
        rec.append(1.0e-7, radii=[0.4 - 1e-9], energy=vals[1])
        path = tmp_path / "run.csv"
        rec.write_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "time,energy,r_1"
        for i, line in enumerate(lines[1:]):
            _, e, r = line.split(",")
            assert float(e) == rec.column("energy")[i]  # 17 digits round-trip
            assert float(r) == rec.interface_radii[i][0]

    def test_meta_json(self, tmp_path):
        import json

        rec = RunRecord(meta={"scheme": "rk4"})
        rec.append(0.0, energy=1.0)
        path = tmp_path / "run.json"
        rec.write_meta(path, lam=1.0)
        data = json.loads(path.read_text())
        assert data["scheme"] == "rk4"
        assert data["lam"] == 1.0
