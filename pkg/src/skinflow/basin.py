"""Basin geometry on the boundary-slope axis and the skin fraction.

The separatrix between the decaying (skin) and oscillating (extended)
basins intersects the slope axis at +-s*(gamma); under a probability
density rho(s) for the boundary slope the skin fraction is the mass of
(-s*, s*). With the default Cauchy density of scale s0 = sqrt(2E) this
integral has the closed form (2/pi) arctan(s*/s0). The fraction jumps at
the fold, where the separatrix disappears at finite size, and decays to
zero as gamma -> 0^- where the separatrix shrinks into the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .classify import ClassifierConfig, classify
from .cycles import continue_branch, find_cycle, locate_fold
from .errors import BracketInvalid, QuadratureFailure, UndecidedAtMidpoint
from .integrate import IntegratorConfig
from .model import ModelParams
from .theory import branch_amplitudes, gamma_c_theory

__all__ = [
    "SlopeDensity",
    "BasinPoint",
    "separatrix_threshold",
    "p_skin_cauchy",
    "p_skin_numeric",
    "jump_at_fold",
    "basin_point",
    "basin_scan",
    "numeric_fold",
    "theory_bracket",
]

TOL_S_DEFAULT = 1e-6


@dataclass(frozen=True)
class SlopeDensity:
    """A normalized probability density over boundary slopes.

    Either the Cauchy family (kind="cauchy", scale s0) or a tabulated
    density interpolated linearly on its grid and zero outside. Tabulated
    values must integrate to 1 within 1e-8 (trapezoid on the grid).
    """

    kind: Literal["cauchy", "tabulated"]
    s0: Optional[float] = None
    grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "cauchy":
            if self.s0 is None or self.s0 <= 0:
                raise ValueError("cauchy density needs s0 > 0")
        elif self.kind == "tabulated":
            if self.grid is None or self.values is None:
                raise ValueError("tabulated density needs grid and values")
            grid = np.asarray(self.grid, dtype=float)
            values = np.asarray(self.values, dtype=float)
            if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
                raise ValueError("grid and values must be matching 1-d arrays")
            if np.any(np.diff(grid) <= 0):
                raise ValueError("grid must be strictly increasing")
            if np.any(values < 0):
                raise ValueError("density values must be nonnegative")
            mass = float(np.trapezoid(values, grid))
            if abs(mass - 1.0) > 1e-8:
                raise ValueError(f"density mass {mass} differs from 1 beyond 1e-8")
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", values)
        else:
            raise ValueError(f"unknown density kind {self.kind!r}")

    @classmethod
    def cauchy(cls, s0: float) -> "SlopeDensity":
        return cls(kind="cauchy", s0=s0)

    @classmethod
    def tabulated(cls, grid, values) -> "SlopeDensity":
        return cls(kind="tabulated", grid=np.asarray(grid, dtype=float),
                   values=np.asarray(values, dtype=float))

    @classmethod
    def default_for(cls, p: ModelParams) -> "SlopeDensity":
        return cls.cauchy(p.omega())

    def evaluate(self, s: float) -> float:
        if self.kind == "cauchy":
            return self.s0 / (math.pi * (s * s + self.s0 * self.s0))
        if s < self.grid[0] or s > self.grid[-1]:
            return 0.0
        return float(np.interp(s, self.grid, self.values))


@dataclass(frozen=True)
class BasinPoint:
    """One gamma of the phase-diagram dataset.

    s_star is absent outside the coexistence window. note carries a
    per-point failure message when the scan had to skip the point (p_skin
    is NaN there and nowhere else).
    """

    gamma: float
    s_star: Optional[float]
    p_skin: float
    bisection_width: float
    note: Optional[str] = None

    def __post_init__(self):
        if self.note is None and not 0.0 <= self.p_skin <= 1.0:
            raise ValueError(f"p_skin {self.p_skin} outside [0, 1]")


def _bisect_threshold(
    p: ModelParams,
    bracket: tuple[float, float],
    tol_s: float,
    cfg: ClassifierConfig,
    integrator: IntegratorConfig,
) -> tuple[float, float]:
    """(s*, final bracket width) by bisection over classify outcomes."""
    s_lo, s_hi = float(bracket[0]), float(bracket[1])
    if not 0 < s_lo < s_hi:
        raise ValueError(f"need 0 < s_lo < s_hi, got {bracket}")
    lo = classify(p, s_lo, cfg, integrator)
    hi = classify(p, s_hi, cfg, integrator)
    if lo.outcome != "skin" or hi.outcome != "extended":
        raise BracketInvalid(
            f"bracket endpoints classify as ({lo.outcome}, {hi.outcome}), "
            "need (skin, extended)",
            lo_outcome=lo.outcome,
            hi_outcome=hi.outcome,
        )
    while s_hi - s_lo > tol_s:
        mid = 0.5 * (s_lo + s_hi)
        verdict = classify(p, mid, cfg, integrator)
        if verdict.outcome == "skin":
            s_lo = mid
        elif verdict.outcome == "extended":
            s_hi = mid
        else:
            raise UndecidedAtMidpoint(
                f"classification undecided at s={mid} "
                f"(bracket narrowed to [{s_lo}, {s_hi}])",
                bracket=(s_lo, s_hi),
            )
    return 0.5 * (s_lo + s_hi), s_hi - s_lo


def separatrix_threshold(
    p: ModelParams,
    bracket: tuple[float, float],
    tol_s: float = TOL_S_DEFAULT,
    cfg: ClassifierConfig = ClassifierConfig(),
    integrator: IntegratorConfig = IntegratorConfig(),
) -> float:
    """Bisect the slope axis for the basin boundary s*.

    The endpoints must classify to opposite basins (BracketInvalid
    otherwise); an undecided midpoint is surfaced with the narrowed
    bracket rather than guessed.
    """
    s_star, _ = _bisect_threshold(p, bracket, tol_s, cfg, integrator)
    return s_star


def theory_bracket(p: ModelParams) -> tuple[float, float]:
    """Bisection bracket [0.5, 2] x omega * A_in from the averaged theory."""
    pred = branch_amplitudes(p)
    if pred.a_in is None or pred.a_in <= 0:
        raise ValueError(
            f"no inner branch at gamma={p.gamma}; no separatrix to bracket")
    center = p.omega() * pred.a_in
    return 0.5 * center, 2.0 * center


def p_skin_cauchy(s_star: float, s0: float) -> float:
    """Closed-form Cauchy mass of (-s*, s*): (2/pi) arctan(s*/s0)."""
    if s_star < 0:
        raise ValueError("s_star must be nonnegative")
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    return (2.0 / math.pi) * math.atan(s_star / s0)


def p_skin_numeric(s_star: float, density: SlopeDensity) -> float:
    """Quadrature of the density over (-s*, s*), absolute tolerance 1e-8."""
    if s_star < 0:
        raise ValueError("s_star must be nonnegative")
    if s_star == 0:
        return 0.0
    breakpoints = None
    if density.kind == "tabulated":
        inside = density.grid[(density.grid > -s_star) & (density.grid < s_star)]
        breakpoints = inside.tolist() or None
    value, abserr = quad(
        density.evaluate, -s_star, s_star,
        epsabs=1e-10, epsrel=1e-10, limit=500, points=breakpoints,
    )
    if abserr > 1e-8:
        raise QuadratureFailure(
            f"density quadrature error estimate {abserr} exceeds 1e-8")
    return min(max(value, 0.0), 1.0)


def _p_skin(s_star: float, density: SlopeDensity) -> float:
    if density.kind == "cauchy":
        return p_skin_cauchy(s_star, density.s0)
    return p_skin_numeric(s_star, density)


def numeric_fold(
    p_base: ModelParams,
    refine_tol: float = 1e-6,
    integrator: IntegratorConfig = IntegratorConfig(),
) -> tuple[float, float]:
    """Numeric fold (gamma_c, s_c) from a theory-seeded branch trace.

    Seeds the stable cycle at gamma = 0.5 from the averaged outer
    amplitude, continues the branch down and around the fold, then refines
    the turning point.
    """
    p_seed = p_base.with_gamma(0.5)
    s_seed = p_seed.omega() * branch_amplitudes(p_seed).a_out
    cycle = find_cycle(p_seed, s_seed, integrator)
    branch = continue_branch(
        p_base, 0.5, cycle, step=0.5,
        gamma_stop=1.5 * gamma_c_theory(p_base), cfg=integrator,
    )
    return locate_fold(branch, refine_tol, integrator)


def jump_at_fold(
    p_base: ModelParams,
    density: SlopeDensity,
    cfg: ClassifierConfig = ClassifierConfig(),
    gamma_c: Optional[float] = None,
    delta: float = 1e-3,
    integrator: IntegratorConfig = IntegratorConfig(),
) -> float:
    """Size of the skin-fraction jump at the fold.

    Evaluates 1 - p_skin(s*(gamma_c + delta)): the density mass outside
    the separatrix at the moment the extended attractor is born. gamma_c
    defaults to the numeric fold of the branch (computed here when not
    supplied); delta keeps the evaluation point clear of the critically
    slow dynamics exactly at the fold.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if gamma_c is None:
        gamma_c, _ = numeric_fold(p_base, integrator=integrator)
    p_eval = p_base.with_gamma(gamma_c + delta)
    pred = branch_amplitudes(p_eval)
    if pred.a_in is None:
        # the numeric fold can sit a hair below the theory fold; fall back
        # to the fold-amplitude seed, which brackets the separatrix anyway
        center = p_eval.omega() * math.sqrt(p_eval.a / p_eval.b)
    else:
        center = p_eval.omega() * pred.a_in
    s_star = separatrix_threshold(
        p_eval, (0.5 * center, 2.0 * center), TOL_S_DEFAULT, cfg, integrator)
    return 1.0 - _p_skin(s_star, density)


def basin_point(
    p_base: ModelParams,
    gamma: float,
    density: SlopeDensity,
    cfg: ClassifierConfig = ClassifierConfig(),
    gamma_c: Optional[float] = None,
    tol_s: float = TOL_S_DEFAULT,
    integrator: IntegratorConfig = IntegratorConfig(),
) -> BasinPoint:
    """One phase-diagram point, with per-point fault isolation.

    Below the fold every slope decays (p_skin = 1, no separatrix); at and
    above zero the origin is unstable (p_skin = 0). Inside the window s*
    is bisected from the theory-seeded bracket. Failures land on the
    point's note instead of propagating, so scans keep going.
    """
    if gamma_c is None:
        gamma_c, _ = numeric_fold(p_base, integrator=integrator)
    if gamma < gamma_c:
        return BasinPoint(gamma, None, 1.0, 0.0)
    if gamma >= 0.0:
        return BasinPoint(gamma, None, 0.0, 0.0)
    try:
        p = p_base.with_gamma(gamma)
        s_star, width = _bisect_threshold(
            p, theory_bracket(p), tol_s, cfg, integrator)
        return BasinPoint(gamma, s_star, _p_skin(s_star, density), width)
    except Exception as exc:  # noqa: BLE001 - per-point fault isolation
        return BasinPoint(gamma, None, math.nan, math.nan, note=str(exc))


def basin_scan(
    p_base: ModelParams,
    gamma_grid: Sequence[float],
    density: SlopeDensity,
    cfg: ClassifierConfig = ClassifierConfig(),
    gamma_c: Optional[float] = None,
    tol_s: float = TOL_S_DEFAULT,
    integrator: IntegratorConfig = IntegratorConfig(),
) -> list[BasinPoint]:
    """Assemble the phase-diagram dataset over a sorted gamma grid."""
    grid = [float(g) for g in gamma_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("gamma_grid must be strictly increasing")
    if gamma_c is None:
        gamma_c, _ = numeric_fold(p_base, integrator=integrator)
    return [
        basin_point(p_base, gamma, density, cfg, gamma_c, tol_s, integrator)
        for gamma in grid
    ]
