"""Planar flow for a wave equation with saturating nonreciprocal gain.

The stationary profile psi(x) obeys a second-order real ODE which we treat
as a planar dynamical system in x:

    d(psi)/dx = v
    d(v)/dx   = 2 F(psi^2) v - 2 E psi,      F(z) = gamma + a z - b z^2

The cubic-quintic drift F grows with intensity z = psi^2 and then
saturates; it is the only nonlinearity.  The origin (0, 0) is the unique
fixed point and stands for boundary-localized ("skin") profiles, while
stable limit cycles stand for extended oscillatory profiles.

This module holds the model definition, its linearization at the origin,
and the two analytic companions used throughout: the energy-like Lyapunov
function V = v^2/2 + E psi^2 and the odd quintic Lienard primitive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "PhaseState",
    "OriginSpectrum",
    "nonreciprocity",
    "flow_rhs",
    "origin_jacobian",
    "origin_eigenvalues",
    "lyapunov_value",
    "lyapunov_rate",
    "lienard_primitive",
]


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    Parameters
    ----------
    gamma : float
        Linear (amplitude-independent) nonreciprocity.
    a : float
        Cubic gain coefficient, >= 0.
    b : float
        Quintic saturation coefficient, >= 0.
    E : float
        Energy of the stationary profile, > 0. The natural spatial
        frequency is omega = sqrt(2 E).

    Notes
    -----
    The nonlinear analysis assumes a > 0 and b > 0; the toolkit accepts
    a = 0 and/or b = 0 so the harmonic and purely linear limits remain
    expressible (used by conservation and linearization checks). Negative
    a, b, or non-positive E are rejected outright.
    """

    gamma: float
    a: float
    b: float
    E: float

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.gamma, self.a, self.b, self.E)):
            raise ValueError("model parameters must be finite")
        if self.a < 0:
            raise ValueError(f"cubic gain coefficient must be >= 0, got a={self.a}")
        if self.b < 0:
            raise ValueError(f"saturation coefficient must be >= 0, got b={self.b}")
        if self.E <= 0:
            raise ValueError(f"energy must be > 0, got E={self.E}")

    def omega(self) -> float:
        """Natural frequency sqrt(2E) of the harmonic limit."""
        return math.sqrt(2.0 * self.E)

    def period(self) -> float:
        """Harmonic period 2*pi/omega."""
        return 2.0 * math.pi / self.omega()

    def with_gamma(self, gamma: float) -> "ModelParams":
        """Copy with a replaced linear coefficient (used by continuation)."""
        return ModelParams(gamma, self.a, self.b, self.E)


@dataclass(frozen=True)
class PhaseState:
    """A point (psi, v) of the planar phase space, v = d(psi)/dx."""

    psi: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.psi) and math.isfinite(self.v)):
            raise ValueError(f"phase state must be finite, got ({self.psi}, {self.v})")

    def as_array(self) -> np.ndarray:
        return np.array([self.psi, self.v], dtype=float)


@dataclass(frozen=True)
class OriginSpectrum:
    """Eigenvalue pair of the origin's Jacobian, always stored as complex."""

    lambda_plus: complex
    lambda_minus: complex


def nonreciprocity(p: ModelParams, z: float) -> float:
    """Intensity-dependent drift F(z) = gamma + a z - b z^2, z = psi^2 >= 0.

    For b > 0 the maximum over z >= 0 is gamma + a^2/(4b), attained at
    z = a/(2b); F < 0 everywhere iff gamma < -a^2/(4b), which is the
    global-decay regime.
    """
    if z < 0:
        raise ValueError(f"intensity must be >= 0, got z={z}")
    return p.gamma + p.a * z - p.b * z * z


def flow_rhs(p: ModelParams, s: PhaseState) -> PhaseState:
    """Right-hand side of the planar flow at state s."""
    z = s.psi * s.psi
    f = p.gamma + p.a * z - p.b * z * z
    return PhaseState(s.v, 2.0 * f * s.v - 2.0 * p.E * s.psi)


def origin_jacobian(p: ModelParams) -> np.ndarray:
    """Jacobian [[0, 1], [-2E, 2 gamma]] of the flow at the origin."""
    return np.array([[0.0, 1.0], [-2.0 * p.E, 2.0 * p.gamma]])


def origin_eigenvalues(p: ModelParams) -> OriginSpectrum:
    """Eigenvalues gamma +/- sqrt(gamma^2 - 2E) of the origin.

    Returned as a complex pair regardless of the discriminant sign, so
    callers never branch on it. For gamma^2 < 2E the pair is a complex
    conjugate with real part gamma: the origin is a spiral whose
    stability flips exactly at gamma = 0.
    """
    disc = complex(p.gamma * p.gamma - 2.0 * p.E)
    root = np.sqrt(disc)
    return OriginSpectrum(p.gamma + root, p.gamma - root)


def lyapunov_value(p: ModelParams, s: PhaseState) -> float:
    """Energy-like Lyapunov function V = v^2/2 + E psi^2 (zero only at origin)."""
    return 0.5 * s.v * s.v + p.E * s.psi * s.psi


def lyapunov_rate(p: ModelParams, s: PhaseState) -> float:
    """dV/dx along the flow: 2 F(psi^2) v^2.

    Non-positive everywhere iff F <= 0 everywhere, i.e. for
    gamma <= -a^2/(4b); in that regime the origin is globally attracting.
    """
    z = s.psi * s.psi
    return 2.0 * (p.gamma + p.a * z - p.b * z * z) * s.v * s.v


def lienard_primitive(p: ModelParams, psi: float) -> float:
    """Odd quintic Lienard primitive F_L(psi) = -2(gamma psi + a psi^3/3 - b psi^5/5).

    This is the integral of the Lienard damping term; the classical
    uniqueness hypotheses for the cycle count are phrased in terms of it.
    """
    return -2.0 * (p.gamma * psi + p.a * psi**3 / 3.0 - p.b * psi**5 / 5.0)
