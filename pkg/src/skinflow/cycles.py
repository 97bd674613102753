"""Limit cycles as fixed points of the section return map, and their branches.

The section is {psi = 0, v > 0}, coordinatized by the crossing velocity s.
One application of the return map integrates the flow from (0, s) to the
next ascending crossing; cycles are roots of F(s) = P(s) - s, found by
Newton iteration with finite-difference slopes. Branches in gamma are
traced by pseudo-arclength predictor-corrector steps in the (s, gamma)
plane, and the saddle-node fold of cycles is pinned down by bisecting the
sign of the tangent's gamma component along the branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .errors import (
    InsufficientEvents,
    NoConvergence,
    NoFoldInBranch,
    NoReturn,
    StepUnderflow,
)
from .integrate import (
    IntegratorConfig,
    integrate,
    lyapunov_below,
    section_crossing,
    turning_point,
)
from .model import ModelParams, PhaseState

__all__ = [
    "LimitCycle",
    "Branch",
    "return_map",
    "find_cycle",
    "continue_branch",
    "locate_fold",
    "cycle_amplitude",
    "amplitude_from_section",
]

Stability = Literal["stable", "unstable", "nonhyperbolic"]

TOL_NEWTON = 1e-10
TOL_HYPERBOLIC = 1e-3
MAX_NEWTON_ITER = 50

# Return window: a cycle comes back within roughly one harmonic period, so
# twenty of them is decisive; trajectories that miss it have decayed or
# escaped the oscillatory regime.
_RETURN_WINDOW_PERIODS = 20.0
# First returns are excluded near x=0 by a guard of a tenth of a period.
_GUARD_FRACTION = 0.1


@dataclass(frozen=True)
class LimitCycle:
    """A converged periodic orbit, recorded by its section data."""

    s_fixed: float
    period: float
    amplitude: float
    multiplier: float
    stability: Stability

    def __post_init__(self):
        if self.s_fixed <= 0 or self.period <= 0 or self.amplitude <= 0:
            raise ValueError("cycle data must be positive")


@dataclass
class Branch:
    """A continuation branch: (gamma, cycle) points in traversal order.

    fold is (gamma_c, s_c) once detected: coarse from continuation, then
    replaced by locate_fold, which also flips fold_refined. arclength_steps
    records the accepted step lengths of the continuation itself (the two
    bracket cycles locate_fold splices in are not continuation steps).
    """

    p_base: ModelParams
    points: list[tuple[float, LimitCycle]] = field(default_factory=list)
    fold: Optional[tuple[float, float]] = None
    arclength_steps: list[float] = field(default_factory=list)
    fold_refined: bool = False

    def gammas(self) -> np.ndarray:
        return np.array([g for g, _ in self.points])

    def section_coords(self) -> np.ndarray:
        return np.array([c.s_fixed for _, c in self.points])


def return_map(
    p: ModelParams,
    s: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> tuple[float, float]:
    """One application of the section return map.

    Integrates from (psi, v) = (0, s) to the next ascending crossing of
    {psi = 0}, skipping a guard interval of a tenth of a harmonic period so
    the departure itself is never reported as the return. Returns the
    crossing velocity and the elapsed x.

    Raises NoReturn when no crossing occurs within twenty periods; its
    ``decayed`` flag reports whether the trajectory had collapsed toward
    the origin (Lyapunov value below 1e-16 of its initial value) rather
    than merely not returning yet.
    """
    if s <= 0:
        raise ValueError(f"section coordinate must be positive, got {s}")
    period = p.period()
    guard = _GUARD_FRACTION * period
    head = integrate(p, PhaseState(0.0, s), (0.0, guard), cfg, dense=False)

    v0_sq_half = 0.5 * s * s
    events = [
        section_crossing(terminal=True),
        lyapunov_below(1e-16 * v0_sq_half, terminal=True),
    ]
    tail = integrate(
        p, head.end_state, (guard, guard + _RETURN_WINDOW_PERIODS * period),
        cfg, events=events, dense=False,
    )
    if tail.terminated_by == "section_crossing":
        hit = tail.events_of("section_crossing")[-1]
        return hit.state.v, hit.x
    decayed = tail.terminated_by == "lyapunov_below"
    if not decayed:
        end = tail.end_state
        decayed = 0.5 * end.v ** 2 + p.E * end.psi ** 2 < 1e-12 * v0_sq_half
    raise NoReturn(
        f"no section return within {_RETURN_WINDOW_PERIODS:g} periods from s={s}"
        + (" (decayed to origin)" if decayed else ""),
        decayed=decayed,
    )


def _fd_multiplier(p: ModelParams, s: float, cfg: IntegratorConfig) -> float:
    # cap the stencil so s - h stays on the half-line for tiny s
    h = min(1e-6 * max(1.0, abs(s)), 0.5 * s)
    p_plus, _ = return_map(p, s + h, cfg)
    p_minus, _ = return_map(p, s - h, cfg)
    return (p_plus - p_minus) / (2.0 * h)


def amplitude_from_section(
    p: ModelParams, s: float, period: float, cfg: IntegratorConfig
) -> float:
    traj = integrate(
        p, PhaseState(0.0, s), (0.0, period), cfg,
        events=[turning_point()], dense=False,
    )
    turns = traj.events_of("turning_point")
    if not turns:
        raise InsufficientEvents(
            f"no turning points over one period from s={s}")
    return max(abs(e.state.psi) for e in turns)


def _stability_of(multiplier: float, tol_h: float = TOL_HYPERBOLIC) -> Stability:
    m = abs(multiplier)
    if m < 1.0 - tol_h:
        return "stable"
    if m > 1.0 + tol_h:
        return "unstable"
    return "nonhyperbolic"


def find_cycle(
    p: ModelParams,
    s_guess: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    tol: float = TOL_NEWTON,
) -> LimitCycle:
    """Newton-solve P(s) = s starting from s_guess.

    The slope of the residual is a central finite difference with step
    1e-6 * max(1, |s|). Steps that leave the half-line s > 0 or fail to
    reduce the residual are halved (at most eight times per iteration).

    Raises NoConvergence after 50 iterations, and propagates NoReturn when
    the iterates wander into the returnless regime.
    """
    if s_guess <= 0:
        raise ValueError(f"s_guess must be positive, got {s_guess}")
    s = float(s_guess)
    p_s, period = return_map(p, s, cfg)
    residual = p_s - s

    collapse_floor = 1e-9 * max(1.0, s_guess)
    for _ in range(MAX_NEWTON_ITER):
        if s < collapse_floor:
            # a "root" this close to the origin is the equilibrium, not a cycle
            raise NoConvergence(
                f"iterates collapsed toward the origin from s_guess={s_guess}; "
                "no cycle at these parameters")
        if abs(residual) < tol:
            multiplier = _fd_multiplier(p, s, cfg)
            amplitude = amplitude_from_section(p, s, period, cfg)
            return LimitCycle(
                s_fixed=s,
                period=period,
                amplitude=amplitude,
                multiplier=multiplier,
                stability=_stability_of(multiplier),
            )
        slope = _fd_multiplier(p, s, cfg) - 1.0
        if slope == 0.0:
            raise NoConvergence(f"flat residual slope at s={s}")
        step = -residual / slope
        for _ in range(8):
            s_new = s + step
            if s_new > 0:
                try:
                    p_new, period_new = return_map(p, s_new, cfg)
                except NoReturn:
                    step *= 0.5
                    continue
                if abs(p_new - s_new) < abs(residual) or abs(step) < 1e-14 * max(1.0, abs(s)):
                    break
            step *= 0.5
        else:
            raise NoConvergence(f"backtracking stalled at s={s}")
        s, p_s, period = s_new, p_new, period_new
        residual = p_s - s

    raise NoConvergence(
        f"no fixed point after {MAX_NEWTON_ITER} iterations from s_guess={s_guess}")


def cycle_amplitude(
    p: ModelParams,
    lc: LimitCycle,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> float:
    """Max |psi| over the turning points of one period from the section."""
    return amplitude_from_section(p, lc.s_fixed, lc.period, cfg)


def _residual(p_base: ModelParams, s: float, gamma: float, cfg: IntegratorConfig) -> float:
    value, _ = return_map(p_base.with_gamma(gamma), s, cfg)
    return value - s


def _residual_gradient(
    p_base: ModelParams, s: float, gamma: float, cfg: IntegratorConfig
) -> tuple[float, float]:
    h_s = 1e-6 * max(1.0, abs(s))
    h_g = 1e-6 * max(1.0, abs(gamma))
    f_s = (_residual(p_base, s + h_s, gamma, cfg)
           - _residual(p_base, s - h_s, gamma, cfg)) / (2.0 * h_s)
    f_g = (_residual(p_base, s, gamma + h_g, cfg)
           - _residual(p_base, s, gamma - h_g, cfg)) / (2.0 * h_g)
    return f_s, f_g


def _corrector(
    p_base: ModelParams,
    pred: np.ndarray,
    tangent: np.ndarray,
    cfg: IntegratorConfig,
    max_iter: int = 8,
) -> Optional[tuple[float, float, float]]:
    """Newton on (residual, orthogonality to the tangent through pred).

    Returns (s, gamma, period) or None when the iteration fails.
    """
    u = pred.copy()
    for _ in range(max_iter):
        s, gamma = float(u[0]), float(u[1])
        if s <= 0:
            return None
        try:
            value, period = return_map(p_base.with_gamma(gamma), s, cfg)
        except NoReturn:
            return None
        res = value - s
        ortho = float(tangent @ (u - pred))
        if abs(res) < TOL_NEWTON and abs(ortho) < 1e-12 * (1.0 + float(np.abs(u).max())):
            return s, gamma, period
        try:
            f_s, f_g = _residual_gradient(p_base, s, gamma, cfg)
        except NoReturn:
            return None
        jac = np.array([[f_s, f_g], [tangent[0], tangent[1]]])
        try:
            du = np.linalg.solve(jac, -np.array([res, ortho]))
        except np.linalg.LinAlgError:
            return None
        u = u + du
    return None


def _point_cycle(
    p_base: ModelParams, s: float, gamma: float, period: float, cfg: IntegratorConfig
) -> LimitCycle:
    p = p_base.with_gamma(gamma)
    multiplier = _fd_multiplier(p, s, cfg)
    amplitude = amplitude_from_section(p, s, period, cfg)
    return LimitCycle(s, period, amplitude, multiplier, _stability_of(multiplier))


def continue_branch(
    p_base: ModelParams,
    gamma_start: float,
    cycle_start: LimitCycle,
    step: float,
    gamma_stop: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    max_steps: int = 400,
) -> Branch:
    """Trace the cycle branch from a converged starting cycle.

    Predictor steps along the unit tangent in the (s, gamma) plane by an
    adaptive arclength (halved on corrector failure, grown 1.3x after fast
    convergence, capped at the requested step); the corrector projects back
    onto the branch orthogonally to the tangent.

    Stops when gamma crosses gamma_stop while heading toward it, when the
    cycle shrinks below s = 1e-3 * omega (the branch terminus near gamma =
    0- is handled analytically elsewhere), when gamma leaves the requested
    window by a wide margin, or after max_steps points. A step underflow
    with no progress raises StepUnderflow; after progress it simply ends
    the branch.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    branch = Branch(p_base=p_base, points=[(gamma_start, cycle_start)])
    toward = math.copysign(1.0, gamma_stop - gamma_start)
    s_floor = 1e-3 * p_base.omega()
    gamma_lo = min(gamma_start, gamma_stop) - 0.5
    gamma_hi = max(gamma_start, gamma_stop) + 0.5

    u = np.array([cycle_start.s_fixed, gamma_start])
    f_s, f_g = _residual_gradient(p_base, u[0], u[1], cfg)
    tangent = np.array([-f_g, f_s])
    norm = np.linalg.norm(tangent)
    if norm == 0:
        raise NoConvergence("degenerate tangent at the starting cycle")
    tangent /= norm
    if tangent[1] * toward < 0:
        tangent = -tangent

    dl = step
    prev_tangent_gamma = tangent[1]

    for _ in range(max_steps):
        corrected = None
        while corrected is None:
            pred = u + dl * tangent
            corrected = _corrector(p_base, pred, tangent, cfg)
            if corrected is None:
                dl *= 0.5
                if dl < 1e-6 * step:
                    if len(branch.points) < 3:
                        raise StepUnderflow(
                            f"continuation stalled near gamma={u[1]:.6g}")
                    return branch
        s_new, gamma_new, period_new = corrected
        u_new = np.array([s_new, gamma_new])

        branch.points.append(
            (gamma_new, _point_cycle(p_base, s_new, gamma_new, period_new, cfg)))
        branch.arclength_steps.append(dl)

        new_tangent = u_new - u
        new_tangent /= np.linalg.norm(new_tangent)
        if branch.fold is None and new_tangent[1] * prev_tangent_gamma < 0:
            g_prev, c_prev = branch.points[-2]
            low = (gamma_new, s_new) if gamma_new * toward > g_prev * toward else (g_prev, c_prev.s_fixed)
            branch.fold = low
        prev_tangent_gamma = new_tangent[1]
        u, tangent = u_new, new_tangent
        dl = min(step, dl * 1.3)

        if (gamma_new - gamma_stop) * toward >= 0:
            break
        if s_new < s_floor:
            break
        if not gamma_lo <= gamma_new <= gamma_hi:
            break

    return branch


def _gamma_on_branch(
    p_base: ModelParams,
    s: float,
    gamma_guess: float,
    cfg: IntegratorConfig,
    max_iter: int = 30,
) -> float:
    """Solve P_gamma(s) = s for gamma at fixed section coordinate s."""
    gamma = float(gamma_guess)
    res = _residual(p_base, s, gamma, cfg)
    for _ in range(max_iter):
        if abs(res) < TOL_NEWTON:
            return gamma
        h_g = 1e-6 * max(1.0, abs(gamma))
        d_res = (_residual(p_base, s, gamma + h_g, cfg)
                 - _residual(p_base, s, gamma - h_g, cfg)) / (2.0 * h_g)
        if d_res == 0.0:
            break
        step = -res / d_res
        for _ in range(8):
            try:
                res_new = _residual(p_base, s, gamma + step, cfg)
            except NoReturn:
                step *= 0.5
                continue
            if abs(res_new) < abs(res):
                break
            step *= 0.5
        else:
            raise NoConvergence(f"gamma solve stalled at s={s}")
        gamma += step
        res = res_new
    if abs(res) < TOL_NEWTON:
        return gamma
    raise NoConvergence(f"gamma solve did not converge at s={s}")


def locate_fold(
    b: Branch,
    refine_tol: float = 1e-6,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> tuple[float, float]:
    """Refine the saddle-node fold of cycles on a traced branch.

    Finds where the branch tangent's gamma component changes sign, then
    bisects in the section coordinate: gamma(s) on the branch is solved by
    a one-dimensional Newton iteration at fixed s, and the finite
    difference gamma(s + h) - gamma(s - h) supplies the tangent sign.
    Stops once the sampled gamma values across the bracket agree within
    refine_tol; the returned (gamma_c, s_c) is the vertex of the parabola
    through the last three samples. Updates b.fold in place and splices
    the two refined bracket cycles into b.points, so the branch points
    adjacent to the fold carry multipliers within a few percent of 1
    rather than whatever the coarse continuation step left there.

    A branch already refined by this function is returned unchanged.

    Raises NoFoldInBranch when no tangent sign change exists in b.
    """
    if b.fold_refined and b.fold is not None:
        return b.fold
    gammas = b.gammas()
    coords = b.section_coords()
    if len(gammas) < 3:
        raise NoFoldInBranch("branch too short to bracket a fold")
    d_gamma = np.diff(gammas)
    flips = np.nonzero(d_gamma[:-1] * d_gamma[1:] < 0)[0]
    if flips.size == 0:
        raise NoFoldInBranch("branch tangent never reverses in gamma")
    k = int(flips[0])

    s_lo, s_hi = sorted((float(coords[k]), float(coords[k + 2])))
    gamma_ref = float(gammas[k + 1])

    def gamma_at(s: float, guess: float) -> float:
        return _gamma_on_branch(b.p_base, s, guess, cfg)

    g_lo = gamma_at(s_lo, gamma_ref)
    g_hi = gamma_at(s_hi, gamma_ref)
    samples = [(s_lo, g_lo), (s_hi, g_hi)]
    g_best = min(g_lo, g_hi)

    for _ in range(60):
        s_mid = 0.5 * (s_lo + s_hi)
        h = 0.05 * (s_hi - s_lo)
        guess = 0.5 * (g_lo + g_hi)
        g_minus = gamma_at(s_mid - h, guess)
        g_plus = gamma_at(s_mid + h, guess)
        samples.extend([(s_mid - h, g_minus), (s_mid + h, g_plus)])
        g_best = min(g_best, g_minus, g_plus)
        # the two flank solves give the tangent sign at s_mid; their mean
        # stands in for gamma(s_mid) at the replaced endpoint
        if g_plus < g_minus:
            s_lo, g_lo = s_mid, 0.5 * (g_minus + g_plus)
        else:
            s_hi, g_hi = s_mid, 0.5 * (g_minus + g_plus)
        if max(g_lo, g_hi) - g_best < refine_tol:
            break

    # solve the surviving endpoints exactly so the spliced cycles satisfy
    # the fixed-point residual like every other branch point
    g_lo = gamma_at(s_lo, g_best)
    g_hi = gamma_at(s_hi, g_best)
    samples.extend([(s_lo, g_lo), (s_hi, g_hi)])

    # parabola vertex through the three lowest samples for a final polish
    samples.sort(key=lambda t: t[1])
    (s1, g1), (s2, g2), (s3, g3) = samples[:3]
    gamma_c, s_c = g1, s1
    denom = (s1 - s2) * (s1 - s3) * (s2 - s3)
    if denom != 0.0:
        a_coef = (s3 * (g2 - g1) + s2 * (g1 - g3) + s1 * (g3 - g2)) / denom
        b_coef = (s3 * s3 * (g1 - g2) + s2 * s2 * (g3 - g1) + s1 * s1 * (g2 - g3)) / denom
        if a_coef > 0:
            s_vertex = -b_coef / (2.0 * a_coef)
            if s_lo - abs(s_hi - s_lo) <= s_vertex <= s_hi + abs(s_hi - s_lo):
                s_c = s_vertex
                gamma_c = gamma_at(s_c, g1)

    # splice the refined bracket cycles into the branch so the points
    # adjacent to the fold are near-nonhyperbolic, as the fold demands
    bracket_points = []
    for s_b, g_b in ((s_hi, g_hi), (s_lo, g_lo)):
        _, period_b = return_map(b.p_base.with_gamma(g_b), s_b, cfg)
        bracket_points.append((g_b, _point_cycle(b.p_base, s_b, g_b, period_b, cfg)))
    window = b.points[k:k + 3] + bracket_points
    descending = bool(coords[k] > coords[k + 2])
    window.sort(key=lambda t: t[1].s_fixed, reverse=descending)
    b.points[k:k + 3] = window

    b.fold = (gamma_c, s_c)
    b.fold_refined = True
    return gamma_c, s_c
