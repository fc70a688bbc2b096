"""Double-well energetics, well-prepared initial data, interface extraction."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from okms import phasefield
from okms.core import BoxGrid, RadialGrid, ScalarField, SimParams, unit_sphere_area
from okms.errors import UndefinedMultiplicityError
from okms.phasefield import (
    InterfaceOverlapWarning,
    ResolutionWarning,
    SIGMA,
    diffuse_energy,
    discrepancy_l1,
    double_well,
    double_well_prime,
    estimate_multiplicity,
    extract_interface,
    interface_area,
    optimal_profile,
    sigma_const,
    well_prepared_init,
)


class TestPotential:
    def test_double_well_values(self):
        assert double_well(1.0) == 0.0
        assert double_well(-1.0) == 0.0
        assert double_well(0.0) == 0.5

    def test_prime_is_derivative(self):
        u = np.linspace(-1.5, 1.5, 11)
        d = 1e-7
        fd = (double_well(u + d) - double_well(u - d)) / (2 * d)
        np.testing.assert_allclose(double_well_prime(u), fd, rtol=1e-5, atol=1e-6)

    def test_sigma_closed_form(self):
        assert sigma_const() == 2.0 / 3.0

    def test_profile_solves_layer_equation(self):
        # eps^2 u'' = W'(u) for u = tanh(d/eps)
        eps = 0.05
        d = np.linspace(-0.3, 0.3, 401)
        u = optimal_profile(d, eps)
        upp = np.gradient(np.gradient(u, d), d)
        np.testing.assert_allclose(
            (eps**2 * upp)[2:-2], double_well_prime(u)[2:-2], atol=5e-3
        )

    @given(d=st.floats(-10, 10))
    @settings(max_examples=30)
    def test_profile_odd_and_bounded(self, d):
        assert abs(optimal_profile(d, 0.1)) <= 1.0
        assert optimal_profile(-d, 0.1) == pytest.approx(-optimal_profile(d, 0.1))


class TestWellPrepared:
    def test_radial_signs(self):
        g = RadialGrid(3, 257)
        u = well_prepared_init(g, [0.4, 0.7], -1, 0.02)
        r = g.r
        assert u.values[r < 0.35].max() < -0.9
        assert u.values[(r > 0.45) & (r < 0.65)].min() > 0.9
        assert u.values[r > 0.75].max() < -0.9

    def test_crossings_at_requested_positions(self):
        g = RadialGrid(3, 257)
        u = well_prepared_init(g, [0.4, 0.7], -1, 0.02)
        got = extract_interface(u).positions
        np.testing.assert_allclose(got, [0.4, 0.7], atol=1e-4)

    def test_box_1d(self):
        g = BoxGrid((1.0,), (256,))
        u = well_prepared_init(g, [0.5], 1, 0.02)
        x = g.axis_nodes(0)
        assert u.values[x < 0.4].min() > 0.9
        assert u.values[x > 0.6].max() < -0.9

    def test_overlap_warning(self):
        g = RadialGrid(3, 257)
        with pytest.warns(InterfaceOverlapWarning):
            well_prepared_init(g, [0.4, 0.5], -1, 0.02)

    def test_position_validation(self):
        g = RadialGrid(3, 257)
        with pytest.raises(ValueError):
            well_prepared_init(g, [0.4, 1.2], -1, 0.02)
        with pytest.raises(ValueError):
            well_prepared_init(g, [0.5], 2, 0.02)

    @given(sign=st.sampled_from([-1, 1]), eps=st.floats(0.02, 0.1))
    @settings(max_examples=15, deadline=None)
    def test_values_in_invariant_range(self, sign, eps):
        g = RadialGrid(3, 257)
        u = well_prepared_init(g, [0.5], sign, eps)
        assert np.all(np.abs(u.values) <= 1.0)
        assert np.sign(u.values[0]) == sign


class TestEnergy:
    def test_heteroclinic_energy_1d(self):
        g = BoxGrid((1.0,), (1024,))
        eps = 0.01
        u = well_prepared_init(g, [0.5], -1, eps)
        e = diffuse_energy(u, SimParams(eps=eps))
        assert e.total == pytest.approx(4.0 / 3.0, abs=1e-4)
        assert e.nonlocal_part == 0.0

    def test_sphere_energy_matches_area_scaling(self):
        # leading order 2*sigma*4*pi*r^2 for one sphere in R^3
        g = RadialGrid(3, 513)
        eps = 0.01
        u = well_prepared_init(g, [0.5], -1, eps)
        e = diffuse_energy(u, SimParams(eps=eps))
        expect = 2.0 * SIGMA * 4.0 * math.pi * 0.25
        assert e.ac_part == pytest.approx(expect, rel=5e-3)

    def test_nonlocal_part_positive_when_lam_on(self):
        g = RadialGrid(3, 257)
        u = well_prepared_init(g, [0.5], -1, 0.04)
        e = diffuse_energy(u, SimParams(eps=0.04, lam=1.0))
        assert e.nonlocal_part > 0.0
        assert e.total == e.ac_part + e.nonlocal_part

    def test_resolution_warning(self):
        g = RadialGrid(3, 65)
        u = ScalarField(g, np.tanh((g.r - 0.5) / 0.01))
        with pytest.warns(ResolutionWarning):
            diffuse_energy(u, SimParams(eps=0.01))

    def test_flat_profile_has_zero_chemical_potential(self):
        # the optimal 1D profile is a critical point: w = eps*u'' - f/eps = 0
        g = BoxGrid((1.0,), (1024,))
        eps = 0.02
        u = well_prepared_init(g, [0.5], -1, eps)
        w = phasefield.chemical_potential(u, SimParams(eps=eps))
        assert np.max(np.abs(w.values)) < 0.05

    def test_chemical_potential_parts_consistent(self):
        g = RadialGrid(3, 257)
        u = well_prepared_init(g, [0.4, 0.7], -1, 0.04)
        parts = phasefield.chemical_potential_parts(u, SimParams(eps=0.04, lam=2.0))
        np.testing.assert_allclose(
            parts.w.values, parts.k.values - 2.0 * parts.v.values, atol=1e-12
        )

    def test_discrepancy_vanishes_for_optimal_profile(self):
        g = BoxGrid((1.0,), (2048,))
        eps = 0.02
        u = well_prepared_init(g, [0.5], -1, eps)
        assert discrepancy_l1(u, eps) < 2e-2


class TestInterface:
    def test_linear_crossing_exact(self):
        g = BoxGrid((1.0,), (64,))
        u = ScalarField(g, g.axis_nodes(0) - 0.3)
        got = extract_interface(u).positions
        np.testing.assert_allclose(got, [0.3], atol=1e-12)

    def test_no_crossing(self):
        g = BoxGrid((1.0,), (64,))
        assert extract_interface(ScalarField(g, np.ones(64))).empty

    def test_clustering(self):
        est = phasefield.InterfaceEstimate(np.array([0.1, 0.12, 0.5]))
        np.testing.assert_allclose(est.clustered(0.05), [0.11, 0.5])
        np.testing.assert_allclose(est.clustered(0.005), [0.1, 0.12, 0.5])

    def test_interface_area(self):
        g = RadialGrid(3, 65)
        assert interface_area(g, [0.5]) == pytest.approx(math.pi, rel=1e-14)
        g2 = RadialGrid(2, 65)
        assert interface_area(g2, [0.5, 0.75]) == pytest.approx(
            2.0 * math.pi * 1.25, rel=1e-14
        )
        gb = BoxGrid((1.0,), (64,))
        assert interface_area(gb, [0.2, 0.8]) == 2.0


class TestMultiplicity:
    def test_simple_interface_is_one(self):
        g = RadialGrid(3, 513)
        eps = 0.02
        u = well_prepared_init(g, [0.5], -1, eps)
        m = estimate_multiplicity(u, SimParams(eps=eps))
        assert m == pytest.approx(1.0, abs=0.1)

    def test_triple_fold_is_three(self):
        g = RadialGrid(3, 1025)
        eps = 0.01
        with pytest.warns(InterfaceOverlapWarning):
            u = well_prepared_init(
                g, [0.5 - 2 * eps, 0.5, 0.5 + 2 * eps], -1, eps
            )
        m = estimate_multiplicity(u, SimParams(eps=eps))
        assert m == pytest.approx(3.0, abs=0.5)

    def test_no_interface_raises(self):
        g = RadialGrid(3, 65)
        with pytest.raises(UndefinedMultiplicityError):
            estimate_multiplicity(
                ScalarField(g, np.ones(65)), SimParams(eps=0.1)
            )
