"""Closed-form averaged amplitude theory.

Writing psi = r cos(theta), v/omega = -r sin(theta) and averaging the
exact radial equation over the fast phase gives the one-dimensional drift

    dr/dx = h(r) = r (gamma + (a/4) r^2 - (b/8) r^4).

Its positive roots are the predicted cycle amplitudes

    A_in/out(gamma) = sqrt( (a/b) (1 -/+ sqrt(1 + 8 b gamma / a^2)) ),

which merge at the fold gamma_c = -a^2/(8b) with amplitude sqrt(a/b) and
whose inner branch obeys the Hopf scaling A_in ~ sqrt(-4 gamma / a) as
gamma -> 0^-.  Everything here is an explicit formula; no integration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

from .model import ModelParams

__all__ = [
    "Regime",
    "TheoryPrediction",
    "avg_drift",
    "avg_drift_derivative",
    "branch_amplitudes",
    "gamma_c_theory",
    "fold_amplitude",
    "hopf_amplitude_scaling",
    "slow_amplitude_validity",
    "exact_radial_rhs",
    "exact_phase_rhs",
]

Regime = Literal["skin_only", "coexistence", "extended_only", "fold_point", "hopf_point"]


@dataclass(frozen=True)
class TheoryPrediction:
    """Predicted branch amplitudes and regime at one gamma.

    ``a_in`` and ``a_out`` are both present exactly in the coexistence
    window gamma_c_th <= gamma < 0 (equal at the fold); only ``a_out``
    survives for gamma >= 0; neither exists below the fold.
    ``validity`` is the smallness ratio of the averaging approximation at
    the outer amplitude (or at 0 when no branch exists) -- reported, never
    used as a gate, because empirically the prediction holds far beyond it.
    """

    gamma: float
    gamma_c_th: float
    a_in: Optional[float]
    a_out: Optional[float]
    regime: Regime
    validity: float


def _require_nonlinear(p: ModelParams) -> None:
    if p.a <= 0 or p.b <= 0:
        raise ValueError("branch structure requires a > 0 and b > 0")


def avg_drift(p: ModelParams, r: float) -> float:
    """Averaged radial drift h(r) = r (gamma + a r^2/4 - b r^4/8)."""
    if r < 0:
        raise ValueError(f"amplitude must be >= 0, got r={r}")
    r2 = r * r
    return r * (p.gamma + 0.25 * p.a * r2 - 0.125 * p.b * r2 * r2)


def avg_drift_derivative(p: ModelParams, r: float) -> float:
    """h'(r) = gamma + (3a/4) r^2 - (5b/8) r^4.

    On a branch root A this reduces to (b/2) A^2 (a/b - A^2): positive on
    the inner branch (repelling), negative on the outer one (attracting).
    h'(0) = gamma reproduces the linear spiral rate.
    """
    if r < 0:
        raise ValueError(f"amplitude must be >= 0, got r={r}")
    r2 = r * r
    return p.gamma + 0.75 * p.a * r2 - 0.625 * p.b * r2 * r2


def gamma_c_theory(p: ModelParams) -> float:
    """Fold threshold prediction gamma_c = -a^2/(8b)."""
    _require_nonlinear(p)
    return -p.a * p.a / (8.0 * p.b)


def fold_amplitude(p: ModelParams) -> float:
    """Branch amplitude sqrt(a/b) at the fold, where A_in = A_out."""
    _require_nonlinear(p)
    return math.sqrt(p.a / p.b)


def branch_amplitudes(p: ModelParams) -> TheoryPrediction:
    """Evaluate both amplitude branches and tag the regime at p.gamma.

    Boundary values gamma == gamma_c_th and gamma == 0 get their own tags
    (``fold_point`` / ``hopf_point``) so downstream phase-diagram assembly
    never double-counts the window edges.
    """
    _require_nonlinear(p)
    g_c = gamma_c_theory(p)
    ratio = p.a / p.b
    disc = 1.0 + 8.0 * p.b * p.gamma / (p.a * p.a)

    a_in: Optional[float] = None
    a_out: Optional[float] = None
    if p.gamma < g_c:
        regime: Regime = "skin_only"
    elif p.gamma == g_c:
        regime = "fold_point"
        a_in = a_out = math.sqrt(ratio)
    elif p.gamma < 0:
        regime = "coexistence"
        root = math.sqrt(disc)
        a_in = math.sqrt(ratio * (1.0 - root))
        a_out = math.sqrt(ratio * (1.0 + root))
    elif p.gamma == 0:
        regime = "hopf_point"
        a_out = math.sqrt(2.0 * ratio)
    else:
        regime = "extended_only"
        a_out = math.sqrt(ratio * (1.0 + math.sqrt(disc)))

    validity = slow_amplitude_validity(p, a_out if a_out is not None else 0.0)
    return TheoryPrediction(p.gamma, g_c, a_in, a_out, regime, validity)


def hopf_amplitude_scaling(p: ModelParams, gamma: float) -> float:
    """Leading-order inner amplitude sqrt(-4 gamma / a) near the Hopf point."""
    if gamma >= 0:
        raise ValueError(f"scaling applies on gamma < 0 only, got {gamma}")
    if p.a <= 0:
        raise ValueError("scaling requires a > 0")
    return math.sqrt(-4.0 * gamma / p.a)


def slow_amplitude_validity(p: ModelParams, r: float) -> float:
    """Smallness ratio (|gamma| + a r^2 + b r^4) / omega of the averaging step."""
    if r < 0:
        raise ValueError(f"amplitude must be >= 0, got r={r}")
    r2 = r * r
    return (abs(p.gamma) + p.a * r2 + p.b * r2 * r2) / p.omega()


def exact_radial_rhs(p: ModelParams, r: float, theta: float) -> float:
    """Unaveraged radial rate 2 r F(r^2 cos^2) sin^2 in polar coordinates.

    Averaging this over theta on [0, 2*pi) with the elementary averages
    <sin^2> = 1/2, <cos^2 sin^2> = 1/8, <cos^4 sin^2> = 1/16 yields
    avg_drift exactly; a property test checks that quadrature converges
    to it.
    """
    c = math.cos(theta)
    s = math.sin(theta)
    z = r * r * c * c
    return 2.0 * r * (p.gamma + p.a * z - p.b * z * z) * s * s


def exact_phase_rhs(p: ModelParams, r: float, theta: float) -> float:
    """Unaveraged phase rate omega + 2 F(r^2 cos^2) sin cos."""
    c = math.cos(theta)
    s = math.sin(theta)
    z = r * r * c * c
    return p.omega() + 2.0 * (p.gamma + p.a * z - p.b * z * z) * s * c
