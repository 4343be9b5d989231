"""Double-well potentials: evaluation, convex splitting, certification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modelh.potential import (
    DegeneratePotentialError,
    PolynomialPotential,
    compute_splitting,
    double_well,
    validate_hypotheses,
)

# (y^2 - 1)^2 = 1 - 2 y^2 + y^4
CANONICAL = (1.0, 0.0, -2.0, 0.0, 1.0)


def grid_min(fun, radius=5.0, samples=200_001):
    """Independent oracle: dense-grid minimum."""
    y = np.linspace(-radius, radius, samples)
    return float(np.min(fun(y)))


class TestEval:
    def test_well_minimum(self):
        F = PolynomialPotential(CANONICAL)
        assert F.f(1.0) == 0.0

    def test_direct_values(self):
        F = PolynomialPotential(CANONICAL)
        assert F.f(0.5) == pytest.approx(4 * 0.125 - 2)       # -1.5
        assert F.f_prime(0.0) == pytest.approx(-4.0)

    def test_order_bounds(self):
        F = PolynomialPotential(CANONICAL)
        with pytest.raises(ValueError):
            F.eval(0.0, 6)
        assert F.eval(0.0, 5) == 0.0  # degree 4: fifth derivative vanishes

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-5, 5), st.integers(0, 4))
    def test_derivative_consistency(self, y, order):
        # central finite differences agree with the next analytic order
        F = double_well(2)
        h = 1e-6 * max(1.0, abs(y))
        fd = (F.eval(y + h, order) - F.eval(y - h, order)) / (2 * h)
        exact = F.eval(y, order + 1)
        assert fd == pytest.approx(exact, rel=1e-5, abs=1e-3)


class TestSplitting:
    def test_canonical(self):
        s = compute_splitting(PolynomialPotential(CANONICAL))
        # oracle: min of F'' = 12 y^2 - 4 is -4 at y = 0
        assert grid_min(lambda y: 12 * y**2 - 4) == pytest.approx(-4.0, abs=1e-6)
        assert s.alpha == pytest.approx(2.0)
        assert s.gamma == 0.0
        assert s.beta == 1.0
        np.testing.assert_allclose(s.convex_coefficients, (0.0, 0.0, 0.0, 0.0, 1.0), atol=1e-12)

    def test_convex_input(self):
        s = compute_splitting(PolynomialPotential((0.0, 0.0, 0.0, 0.0, 1.0)))
        assert s.alpha == 0.0 and s.gamma == 0.0 and s.beta == 0.0
        assert s.convex_coefficients[-1] == 1.0

    def test_linear_term_shifts_gamma_only(self):
        s = compute_splitting(PolynomialPotential((1.0, 1.0, -2.0, 0.0, 1.0)))
        assert s.alpha == pytest.approx(2.0)
        assert s.gamma == pytest.approx(1.0)
        assert s.beta == pytest.approx(1.0)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 4.0))
    def test_reconstruction_identity(self, c1, c2, c4):
        # F(y) = F0(y) - alpha y^2 + gamma y + beta at the coefficient level
        F = PolynomialPotential((0.7, c1, c2, 0.1, c4))
        s = compute_splitting(F)
        rebuilt = np.array(s.convex_coefficients)
        rebuilt[2] -= s.alpha
        rebuilt[1] += s.gamma
        rebuilt[0] += s.beta
        np.testing.assert_allclose(rebuilt, F.coefficients, rtol=1e-12, atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 4.0), st.floats(-4, 4))
    def test_fprime_lower_bound(self, c1, c2, c4, y):
        F = PolynomialPotential((0.7, c1, c2, 0.1, c4))
        s = compute_splitting(F)
        assert F.f_prime(y) >= -2.0 * s.alpha - 1e-9 * (1 + abs(F.f_prime(y)))


class TestCertification:
    def test_canonical_passes(self):
        report = validate_hypotheses(PolynomialPotential(CANONICAL), radius=10.0, samples=10_000)
        assert report.ok
        assert report.growth_exponent == 1
        assert report.coercivity_exponent == 2
        assert all(math.isfinite(c) for c in report.control_constants)
        assert all(math.isfinite(r) for r in report.asymptotic_ratios)
        assert report.coercivity_constant > 0
        # C_f oracle: f'' = 24 y, so sup |24 y| / (1 + |y|) on the grid is
        # attained at the boundary, 240 / 11
        assert report.growth_constant == pytest.approx(240.0 / 11.0, rel=1e-3)
        # independent coarse-grid oracle for c_0
        y = np.linspace(-10, 10, 2001)
        F = PolynomialPotential(CANONICAL)
        ratio = np.abs(F.f(y)) / (1.0 + F.eval(y, 0) ** (3.0 / 4.0))
        assert report.control_constants[0] == pytest.approx(float(ratio.max()), rel=0.05)

    def test_higher_family_same_code_path(self):
        report = validate_hypotheses(double_well(2), radius=10.0, samples=10_000)
        assert report.ok
        assert report.growth_exponent == 5
        assert all(math.isfinite(c) for c in report.control_constants)

    def test_negative_potential_flagged(self):
        report = validate_hypotheses(PolynomialPotential((-10.0, 0.0, 0.0, 0.0, 1.0)),
                                     radius=10.0, samples=2000)
        assert not report.ok
        assert not report.positivity_ok
        assert any("positivity" in v for v in report.violations)

    def test_odd_degree_rejected_at_construction(self):
        with pytest.raises(DegeneratePotentialError):
            PolynomialPotential((1.0, 0.0, 0.0, 0.0, 0.0, 1.0))  # degree 5

    def test_degenerate_rejected(self):
        with pytest.raises(DegeneratePotentialError):
            PolynomialPotential((0.0, 1.0, 1.0))  # degree 2
        with pytest.raises(DegeneratePotentialError):
            PolynomialPotential((1.0, 0.0, 0.0, 0.0, -1.0))  # negative leading

    def test_radius_precondition(self):
        with pytest.raises(ValueError):
            validate_hypotheses(PolynomialPotential(CANONICAL), radius=1.5)
        with pytest.raises(ValueError):
            validate_hypotheses(PolynomialPotential(CANONICAL), radius=10.0, samples=10)

    def test_p1_fourth_derivative_flag(self):
        report = validate_hypotheses(double_well(1), radius=10.0, samples=2000)
        assert report.fourth_derivative_globally_bounded
        report8 = validate_hypotheses(double_well(2), radius=10.0, samples=2000)
        assert not report8.fourth_derivative_globally_bounded


class TestFamily:
    def test_double_well_degrees(self):
        assert double_well(1).coefficients == CANONICAL
        assert double_well(2).degree == 8
        assert double_well(2).growth_exponent == 5
