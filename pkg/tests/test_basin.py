"""Basin boundary bisection, slope densities, and the skin fraction."""
import math

import numpy as np
import pytest

import skinflow.basin
from skinflow import (
    BasinPoint,
    BracketInvalid,
    ClassifierConfig,
    ShotResult,
    SlopeDensity,
    UndecidedAtMidpoint,
    basin_point,
    basin_scan,
    find_cycle,
    jump_at_fold,
    p_skin_cauchy,
    p_skin_numeric,
    separatrix_threshold,
    theory_bracket,
)

TOL_FAST = 1e-3


def triangle_density():
    # peak 0.1 at s=0, support [-10, 10]: trapezoid mass is exactly 1
    return SlopeDensity.tabulated([-10.0, 0.0, 10.0], [0.0, 0.1, 0.0])


class TestSlopeDensity:
    def test_cauchy_needs_positive_scale(self):
        with pytest.raises(ValueError):
            SlopeDensity.cauchy(0.0)
        with pytest.raises(ValueError):
            SlopeDensity(kind="cauchy")

    def test_default_scale_is_omega(self, benchmark_params):
        d = SlopeDensity.default_for(benchmark_params)
        assert d.kind == "cauchy"
        assert d.s0 == benchmark_params.omega()

    def test_cauchy_evaluate(self):
        d = SlopeDensity.cauchy(4.0)
        assert d.evaluate(0.0) == pytest.approx(1.0 / (4.0 * math.pi))
        assert d.evaluate(4.0) == pytest.approx(1.0 / (8.0 * math.pi))

    def test_tabulated_validation(self):
        with pytest.raises(ValueError):
            SlopeDensity.tabulated([0.0, 1.0], [1.0])
        with pytest.raises(ValueError):
            SlopeDensity.tabulated([1.0, 0.0], [0.5, 0.5])
        with pytest.raises(ValueError):
            SlopeDensity.tabulated([0.0, 1.0], [-1.0, 3.0])
        with pytest.raises(ValueError):
            SlopeDensity.tabulated([0.0, 1.0], [1.0, 3.0])
        with pytest.raises(ValueError):
            SlopeDensity(kind="gaussian")

    def test_tabulated_evaluate(self):
        d = triangle_density()
        assert d.evaluate(0.0) == pytest.approx(0.1)
        assert d.evaluate(5.0) == pytest.approx(0.05)
        assert d.evaluate(11.0) == 0.0
        assert d.evaluate(-11.0) == 0.0


class TestSkinFraction:
    def test_cauchy_closed_form_oracle(self):
        assert p_skin_cauchy(8.69755877, 4.0) == pytest.approx(
            0.725581538476485, rel=1e-12)
        assert p_skin_cauchy(4.0, 4.0) == pytest.approx(0.5, rel=1e-15)
        assert p_skin_cauchy(0.0, 4.0) == 0.0

    def test_cauchy_quadrature_matches_closed_form(self):
        d = SlopeDensity.cauchy(4.0)
        for s_star in (0.5, 4.0, 8.69755877, 16.0):
            assert p_skin_numeric(s_star, d) == pytest.approx(
                p_skin_cauchy(s_star, 4.0), abs=1e-8)

    def test_tabulated_mass(self):
        # triangle: mass inside (-5, 5) is 0.75 in closed form
        assert p_skin_numeric(5.0, triangle_density()) == pytest.approx(
            0.75, abs=1e-8)
        assert p_skin_numeric(20.0, triangle_density()) == pytest.approx(
            1.0, abs=1e-8)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            p_skin_cauchy(-1.0, 4.0)
        with pytest.raises(ValueError):
            p_skin_cauchy(1.0, 0.0)
        with pytest.raises(ValueError):
            p_skin_numeric(-1.0, triangle_density())
        assert p_skin_numeric(0.0, triangle_density()) == 0.0


class TestTheoryBracket:
    def test_centered_on_inner_branch(self, benchmark_params):
        lo, hi = theory_bracket(benchmark_params)
        center = benchmark_params.omega() * 2.1647844005847876
        assert lo == pytest.approx(0.5 * center, rel=1e-12)
        assert hi == pytest.approx(2.0 * center, rel=1e-12)

    def test_no_inner_branch(self, benchmark_params):
        with pytest.raises(ValueError):
            theory_bracket(benchmark_params.with_gamma(0.2))


class TestSeparatrix:
    def test_matches_inner_cycle_fixed_point(self, benchmark_params, integrator):
        # the basin boundary on the slope axis is the unstable cycle itself,
        # so bisection must land on its section fixed point
        cycle = find_cycle(benchmark_params, 8.7, integrator)
        s_star = separatrix_threshold(
            benchmark_params, theory_bracket(benchmark_params), tol_s=1e-6)
        assert abs(s_star - cycle.s_fixed) < 5e-6

    def test_bracket_must_straddle(self, benchmark_params):
        with pytest.raises(BracketInvalid) as exc_info:
            separatrix_threshold(benchmark_params, (1.0, 2.0), tol_s=TOL_FAST)
        assert exc_info.value.lo_outcome == "skin"
        assert exc_info.value.hi_outcome == "skin"
        with pytest.raises(ValueError):
            separatrix_threshold(benchmark_params, (2.0, 1.0), tol_s=TOL_FAST)

    def test_undecided_midpoint_is_surfaced(self, benchmark_params, monkeypatch):
        def stub(p, s, cfg=None, integrator=None):
            if s < 8.0:
                outcome, amp = "skin", None
            elif s > 9.0:
                outcome, amp = "extended", 5.0
            else:
                outcome, amp = "undecided", None
            return ShotResult(s, outcome, 0.5, 0.01, amp, 100.0)

        monkeypatch.setattr(skinflow.basin, "classify", stub)
        with pytest.raises(UndecidedAtMidpoint) as exc_info:
            separatrix_threshold(benchmark_params, (7.0, 10.0), tol_s=1e-6)
        lo, hi = exc_info.value.bracket
        assert 7.0 <= lo < hi <= 10.0


class TestBasinPoint:
    def test_below_fold_is_all_skin(self, benchmark_params, numeric_fold):
        pt = basin_point(benchmark_params, -1.2, SlopeDensity.cauchy(4.0),
                         gamma_c=numeric_fold[0])
        assert pt.p_skin == 1.0
        assert pt.s_star is None
        assert pt.note is None

    def test_unstable_origin_is_all_extended(self, benchmark_params, numeric_fold):
        for gamma in (0.0, 0.3):
            pt = basin_point(benchmark_params, gamma, SlopeDensity.cauchy(4.0),
                             gamma_c=numeric_fold[0])
            assert pt.p_skin == 0.0
            assert pt.s_star is None

    def test_coexistence_window(self, benchmark_params, numeric_fold):
        pt = basin_point(benchmark_params, -0.5, SlopeDensity.cauchy(4.0),
                         gamma_c=numeric_fold[0], tol_s=TOL_FAST)
        assert pt.note is None
        assert pt.s_star == pytest.approx(8.6975586, abs=2 * TOL_FAST)
        assert pt.p_skin == pytest.approx(0.72558, abs=1e-4)
        assert pt.bisection_width <= TOL_FAST

    def test_fault_isolation(self, benchmark_params, numeric_fold):
        # a classifier that cannot decide anything turns into a per-point
        # note instead of aborting the scan
        broken = ClassifierConfig(
            max_doublings=0, early_exit_V=5e-324, early_exit_band=0.0)
        pt = basin_point(benchmark_params, -0.5, SlopeDensity.cauchy(4.0),
                         cfg=broken, gamma_c=numeric_fold[0])
        assert pt.note is not None
        assert math.isnan(pt.p_skin)
        assert pt.s_star is None

    def test_point_validation(self):
        with pytest.raises(ValueError):
            BasinPoint(-0.5, 8.7, 1.2, 0.0)
        faulted = BasinPoint(-0.5, None, math.nan, math.nan, note="boom")
        assert faulted.note == "boom"


class TestBasinScan:
    def test_grid_must_increase(self, benchmark_params, numeric_fold):
        with pytest.raises(ValueError):
            basin_scan(benchmark_params, [-0.5, -0.5], SlopeDensity.cauchy(4.0),
                       gamma_c=numeric_fold[0])

    def test_monotone_fraction_in_window(self, benchmark_params, numeric_fold):
        # deeper gamma means a larger separatrix and a larger skin fraction
        pts = basin_scan(
            benchmark_params, [-0.9, -0.5, -0.1], SlopeDensity.cauchy(4.0),
            gamma_c=numeric_fold[0], tol_s=TOL_FAST)
        stars = [pt.s_star for pt in pts]
        fracs = [pt.p_skin for pt in pts]
        assert all(pt.note is None for pt in pts)
        assert stars[0] > stars[1] > stars[2]
        assert fracs[0] > fracs[1] > fracs[2]
        assert fracs[0] > 0.5 > fracs[2]

    def test_spans_all_regimes(self, benchmark_params, numeric_fold):
        pts = basin_scan(
            benchmark_params, [-1.5, -0.5, 0.5], SlopeDensity.cauchy(4.0),
            gamma_c=numeric_fold[0], tol_s=TOL_FAST)
        assert pts[0].p_skin == 1.0
        assert 0.0 < pts[1].p_skin < 1.0
        assert pts[2].p_skin == 0.0


class TestJumpAtFold:
    def test_delta_validation(self, benchmark_params):
        with pytest.raises(ValueError):
            jump_at_fold(benchmark_params, SlopeDensity.cauchy(4.0),
                         gamma_c=-1.0, delta=0.0)

    def test_jump_is_finite_size(self, benchmark_params, numeric_fold):
        # just above the fold the separatrix is born at finite size, so a
        # finite density mass flips to the extended side all at once
        jump = jump_at_fold(benchmark_params, SlopeDensity.cauchy(4.0),
                            gamma_c=numeric_fold[0])
        assert 0.05 <= jump <= 0.5
        # the fold sits near s = 16: the closed form puts the mass beyond
        # it at about 0.156, and the measured jump must sit nearby
        assert jump == pytest.approx(1.0 - p_skin_cauchy(16.0, 4.0), abs=0.05)


class TestNumericFold:
    def test_module_entry_matches_branch_fixture(self, benchmark_params, numeric_fold):
        gamma_c, s_c = skinflow.basin.numeric_fold(benchmark_params)
        assert gamma_c == pytest.approx(numeric_fold[0], abs=2e-3)
        assert s_c == pytest.approx(numeric_fold[1], abs=0.1)
