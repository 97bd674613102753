"""Return map, cycle finding, continuation, and fold refinement."""
import math

import numpy as np
import pytest

from skinflow import (
    Branch,
    IntegratorConfig,
    ModelParams,
    NoConvergence,
    NoFoldInBranch,
    NoReturn,
    branch_amplitudes,
    continue_branch,
    cycle_amplitude,
    find_cycle,
    locate_fold,
    return_map,
)
from skinflow.cycles import TOL_NEWTON


class TestReturnMap:
    def test_harmonic_limit_is_identity(self):
        # conservative rotation: s maps to s after one period 2 pi / omega
        p = ModelParams(gamma=0.0, a=0.0, b=0.0, E=8.0)
        for s in (0.5, 2.0, 11.0):
            s_next, elapsed = return_map(p, s)
            assert s_next == pytest.approx(s, rel=1e-9)
            assert elapsed == pytest.approx(p.period(), rel=1e-9)

    def test_global_decay_contracts(self, benchmark_params):
        p = benchmark_params.with_gamma(-2.5)
        for s in (0.5, 4.0, 20.0):
            try:
                s_next, _ = return_map(p, s)
            except NoReturn as exc:
                assert exc.decayed
                continue
            assert s_next < s

    def test_unique_cycle_attracts_from_both_sides(self, benchmark_params):
        p = benchmark_params.with_gamma(0.2)
        s_cycle = find_cycle(p, 20.0).s_fixed
        below, _ = return_map(p, 0.5 * s_cycle)
        above, _ = return_map(p, 1.5 * s_cycle)
        assert below > 0.5 * s_cycle
        assert above < 1.5 * s_cycle

    def test_rejects_nonpositive_slope(self, benchmark_params):
        with pytest.raises(ValueError):
            return_map(benchmark_params, 0.0)

    def test_period_near_harmonic(self, benchmark_params):
        # weak drift: return time within a few percent of 2 pi / omega
        _, elapsed = return_map(benchmark_params, 10.0)
        assert elapsed == pytest.approx(benchmark_params.period(), rel=0.05)


class TestFindCycle:
    def test_inner_cycle_benchmark(self, benchmark_params):
        # unstable inner root near 8.6976 with multiplier > 1
        lc = find_cycle(benchmark_params, 9.0)
        assert lc.s_fixed == pytest.approx(8.69756, abs=2e-5)
        assert lc.multiplier > 1.0
        assert lc.stability == "unstable"
        assert lc.amplitude == pytest.approx(2.1648, abs=5e-3)

    def test_outer_cycle_benchmark(self, benchmark_params):
        lc = find_cycle(benchmark_params, 22.0)
        assert abs(lc.multiplier) < 1.0
        assert lc.stability == "stable"
        assert lc.amplitude == pytest.approx(5.2263, abs=5e-3)

    def test_fixed_point_residual(self, benchmark_params):
        lc = find_cycle(benchmark_params, 9.0)
        s_next, _ = return_map(benchmark_params, lc.s_fixed)
        assert abs(s_next - lc.s_fixed) < TOL_NEWTON

    def test_unique_cycle_from_spread_guesses(self, benchmark_params):
        p = benchmark_params.with_gamma(0.2)
        roots = [find_cycle(p, g).s_fixed for g in (8.0, 20.0, 30.0)]
        assert max(roots) - min(roots) < 1e-8

    def test_no_cycle_below_fold(self, benchmark_params):
        p = benchmark_params.with_gamma(-2.0)
        with pytest.raises((NoConvergence, NoReturn)):
            find_cycle(p, 16.0)

    def test_rejects_nonpositive_guess(self, benchmark_params):
        with pytest.raises(ValueError):
            find_cycle(benchmark_params, -3.0)


class TestStabilityConsistency:
    @pytest.mark.parametrize("gamma", [-0.9, -0.5, -0.1])
    def test_stable_attracts_unstable_repels(self, benchmark_params, gamma):
        p = benchmark_params.with_gamma(gamma)
        pred = branch_amplitudes(p)
        omega = p.omega()
        inner = find_cycle(p, omega * pred.a_in)
        outer = find_cycle(p, omega * pred.a_out)
        assert inner.stability == "unstable"
        assert outer.stability == "stable"

        # stable cycle: perturbed shots come back toward the fixed point
        for factor in (0.99, 1.01):
            s0 = outer.s_fixed * factor
            s1, _ = return_map(p, s0)
            assert abs(s1 - outer.s_fixed) < abs(s0 - outer.s_fixed)

        # unstable cycle: perturbed shots leave toward the two attractors
        drift_out, _ = return_map(p, inner.s_fixed * 1.01)
        assert drift_out - inner.s_fixed > 0.01 * inner.s_fixed
        drift_in, _ = return_map(p, inner.s_fixed * 0.99)
        assert inner.s_fixed - drift_in > 0.01 * inner.s_fixed


class TestCycleAmplitude:
    def test_theory_agreement_extended_only(self, benchmark_params):
        p = benchmark_params.with_gamma(0.2)
        lc = find_cycle(p, 20.0)
        a_th = branch_amplitudes(p).a_out
        assert cycle_amplitude(p, lc) == pytest.approx(a_th, rel=0.01)

    def test_matches_stored_amplitude(self, benchmark_params):
        lc = find_cycle(benchmark_params, 22.0)
        assert cycle_amplitude(benchmark_params, lc) == pytest.approx(
            lc.amplitude, rel=1e-9)


class TestContinuation:
    def test_branch_reaches_both_regimes(self, default_branch):
        gammas = default_branch.gammas()
        assert gammas.max() == pytest.approx(0.5, abs=1e-12)
        assert gammas.min() < -0.99

    def test_section_coordinate_monotone(self, default_branch):
        coords = default_branch.section_coords()
        assert all(x > y for x, y in zip(coords, coords[1:]))

    def test_branch_continuity(self, default_branch):
        # consecutive points separated by less than twice the largest step
        pts = np.column_stack(
            [default_branch.section_coords(), default_branch.gammas()])
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        assert gaps.max() < 2.0 * max(default_branch.arclength_steps)

    def test_fixed_point_residuals_along_branch(
            self, benchmark_params, default_branch, integrator):
        for gamma, lc in default_branch.points[::9]:
            p = benchmark_params.with_gamma(gamma)
            s_next, _ = return_map(p, lc.s_fixed, integrator)
            assert abs(s_next - lc.s_fixed) < TOL_NEWTON

    def test_unstable_tail_shrinks_toward_origin(self, default_branch):
        # inner branch amplitude heads to zero as gamma -> 0^-
        tail_gamma, tail_cycle = default_branch.points[-1]
        assert -0.05 < tail_gamma < 0.0 or tail_cycle.s_fixed < 0.01
        assert tail_cycle.amplitude < 0.2

    def test_stability_flips_once_at_fold(self, default_branch):
        labels = [lc.stability for _, lc in default_branch.points
                  if lc.stability != "nonhyperbolic"]
        flips = sum(1 for x, y in zip(labels, labels[1:]) if x != y)
        assert flips == 1
        assert labels[0] == "stable"
        assert labels[-1] == "unstable"

    def test_amplitude_tracks_theory_on_both_branches(
            self, benchmark_params, default_branch):
        for gamma, lc in default_branch.points:
            pred = branch_amplitudes(benchmark_params.with_gamma(gamma))
            ref = pred.a_out if lc.stability == "stable" else pred.a_in
            if ref is None or lc.stability == "nonhyperbolic":
                continue
            assert lc.amplitude == pytest.approx(ref, rel=0.10)


class TestFold:
    def test_location(self, numeric_fold):
        gamma_c, s_c = numeric_fold
        assert gamma_c == pytest.approx(-1.0, abs=0.05)
        # fold amplitude sqrt(a/b) = 4 maps to s_c ~ omega * 4
        assert s_c == pytest.approx(16.0, abs=0.5)

    def test_bracketing_points_near_nonhyperbolic(
            self, default_branch, numeric_fold):
        _, s_c = numeric_fold
        above = [lc for _, lc in default_branch.points if lc.s_fixed > s_c][-1]
        below = [lc for _, lc in default_branch.points if lc.s_fixed < s_c][0]
        assert abs(above.multiplier - 1.0) < 0.05
        assert abs(below.multiplier - 1.0) < 0.05

    def test_refinement_idempotent(self, default_branch, numeric_fold):
        n_points = len(default_branch.points)
        assert locate_fold(default_branch) == numeric_fold
        assert len(default_branch.points) == n_points

    def test_no_fold_in_truncated_branch(self, benchmark_params, integrator):
        p_start = benchmark_params.with_gamma(0.5)
        seed = branch_amplitudes(p_start).a_out
        cycle = find_cycle(p_start, p_start.omega() * seed, integrator)
        short = continue_branch(
            benchmark_params, 0.5, cycle, step=0.35, gamma_stop=-0.5,
            cfg=integrator)
        with pytest.raises(NoFoldInBranch):
            locate_fold(short)

    def test_fold_amplitude_near_theory(self, benchmark_params, numeric_fold,
                                        integrator):
        from skinflow import amplitude_from_section
        gamma_c, s_c = numeric_fold
        p_c = benchmark_params.with_gamma(gamma_c)
        _, period = return_map(p_c, s_c, integrator)
        amp = amplitude_from_section(p_c, s_c, period, integrator)
        assert amp == pytest.approx(4.0, rel=0.10)


class TestBranchContainer:
    def test_empty_branch_arrays(self, benchmark_params):
        b = Branch(p_base=benchmark_params)
        assert b.gammas().size == 0
        assert b.section_coords().size == 0
        with pytest.raises(NoFoldInBranch):
            locate_fold(b)
