"""Shooting from the boundary condition and skin/extended classification.

A shot launches the flow from (psi, v) = (0, s) and watches what the
trajectory does: collapse toward the origin (a skin mode, normalizable on
the half-line) or settle onto the attracting cycle (an extended mode).
The workhorse criterion is the fractal dimension D2 = -ln(IPR)/ln(L) under
length doubling, with two physically motivated early exits so that basin
scans stay affordable: a Lyapunov-value floor for decided decay, and
stationarity of the turning-point amplitude at the predicted outer-cycle
value for decided capture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DegenerateTrajectory, InsufficientEvents
from .integrate import (
    IntegratorConfig,
    Trajectory,
    integrate,
    lyapunov_below,
    section_crossing,
    turning_point,
)
from .model import ModelParams, PhaseState, lyapunov_value
from .theory import branch_amplitudes

__all__ = [
    "Outcome",
    "ShotResult",
    "ClassifierConfig",
    "shoot",
    "ipr",
    "fractal_dimension",
    "classify",
    "asymptotic_amplitude",
    "turning_amplitude_spread",
]

Outcome = Literal["skin", "extended", "undecided"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
_TAIL_TURNINGS = 8


@dataclass(frozen=True)
class ShotResult:
    """Classification of one boundary slope.

    transit_length is the x at which the outcome was decided (the early
    exit point, or the total length at D2 convergence). d2 and ipr are the
    estimates at that point; d2 may slightly exceed 1 at finite length.
    """

    slope: float
    outcome: Outcome
    d2: float
    ipr: float
    asymptotic_amplitude: Optional[float]
    transit_length: float

    def __post_init__(self):
        if self.ipr <= 0:
            raise ValueError("ipr must be positive")
        if self.d2 < 0:
            raise ValueError("d2 must be nonnegative")
        if self.outcome == "extended" and not (
            self.asymptotic_amplitude and self.asymptotic_amplitude > 0
        ):
            raise ValueError("extended outcome requires a positive asymptotic amplitude")


@dataclass(frozen=True)
class ClassifierConfig:
    """Lengths, thresholds, and early-exit knobs for classify().

    base_length=None means 100 harmonic periods of the model at hand.
    Setting early_exit_V to a denormal-small value and early_exit_band to 0
    disables the early exits (used by the consistency checks).
    """

    base_length: Optional[float] = None
    max_doublings: int = 6
    d2_threshold: float = 0.5
    early_exit_V: float = 1e-16
    early_exit_band: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.d2_threshold < 1.0):
            raise ValueError("d2_threshold must lie in (0, 1)")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be nonnegative")
        if self.early_exit_V <= 0:
            raise ValueError("early_exit_V must be positive")
        if self.early_exit_band < 0:
            raise ValueError("early_exit_band must be nonnegative")

    def effective_base_length(self, p: ModelParams) -> float:
        length = 100.0 * p.period() if self.base_length is None else self.base_length
        if length < 10.0 * p.period():
            raise ValueError("base_length must be at least 10 periods")
        return length


def shoot(
    p: ModelParams,
    s: float,
    L: float,
    cfg: IntegratorConfig = IntegratorConfig(),
) -> Trajectory:
    """Integrate from (0, s) over [0, L] with turning and section events."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    run_cfg = cfg if L <= cfg.effective_max_x(p) else IntegratorConfig(
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol, max_step=cfg.max_step,
        max_x=1.01 * L,
    )
    return integrate(
        p, PhaseState(0.0, s), (0.0, L), run_cfg,
        events=[turning_point(), section_crossing()],
    )


def _accumulate_moments(t: Trajectory, upto: float) -> tuple[float, float]:
    """(integral of psi^2, integral of psi^4) over [x0, upto] by per-step
    10-point Gauss quadrature on the dense output."""
    if t.dense is None:
        raise DegenerateTrajectory("moment quadrature needs dense output")
    edges = t.xs[t.xs < upto]
    edges = np.append(edges, upto)
    i2 = 0.0
    i4 = 0.0
    for x_a, x_b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (x_b - x_a)
        if half <= 0:
            continue
        mid = 0.5 * (x_a + x_b)
        psi = t.dense(mid + half * _GL_NODES)[0]
        sq = psi * psi
        i2 += half * float(_GL_WEIGHTS @ sq)
        i4 += half * float(_GL_WEIGHTS @ (sq * sq))
    return i2, i4


def ipr(t: Trajectory, L: float) -> float:
    """Inverse participation ratio of psi over [0, L] on the dense output."""
    if L <= 0:
        raise ValueError("L must be positive")
    i2, i4 = _accumulate_moments(t, min(L, t.x_end))
    if i2 <= 0.0:
        raise DegenerateTrajectory("trajectory is identically zero on [0, L]")
    return i4 / (i2 * i2)


def fractal_dimension(ipr_value: float, L: float) -> float:
    """D2 estimate -ln(IPR)/ln(L); 1 for extended, 0 for localized."""
    if ipr_value <= 0:
        raise ValueError("ipr_value must be positive")
    if L <= 1:
        raise ValueError("L must exceed 1")
    return -math.log(ipr_value) / math.log(L)


def turning_amplitude_spread(amplitudes: np.ndarray) -> float:
    """Relative spread (max-min)/mean of a block of turning amplitudes."""
    mean = float(np.mean(amplitudes))
    if mean <= 0:
        return math.inf
    return float((np.max(amplitudes) - np.min(amplitudes)) / mean)


def asymptotic_amplitude(
    t: Trajectory,
    k: int = _TAIL_TURNINGS,
    early_exit_V: float = 1e-16,
    p: Optional[ModelParams] = None,
) -> Optional[float]:
    """Mean |psi| over the last k turning points of a settled trajectory.

    Returns None when the tail has decayed beneath early_exit_V (no
    asymptotic orbit to speak of); the Lyapunov value uses the trajectory's
    own E when p is given, else the spread of the final state.
    Raises InsufficientEvents with fewer than 4 turning points.
    """
    turns = t.events_of("turning_point")
    if len(turns) < 4:
        raise InsufficientEvents(
            f"need at least 4 turning points, trajectory has {len(turns)}")
    end = t.end_state
    tail_v = (
        lyapunov_value(p, end) if p is not None
        else 0.5 * end.v ** 2 + end.psi ** 2
    )
    if tail_v < early_exit_V:
        return None
    amps = np.array([abs(e.state.psi) for e in turns[-k:]])
    return float(np.mean(amps))


def _theory_band(p: ModelParams, band: float) -> tuple[Optional[float], float]:
    """Predicted outer amplitude and the (possibly tightened) match band.

    In the coexistence window the band is capped at 40% of the branch gap
    so a shot still shadowing the inner cycle is never declared captured.
    """
    try:
        pred = branch_amplitudes(p)
    except ValueError:
        return None, band
    if pred.a_out is None or pred.a_out <= 0:
        return None, band
    if pred.a_in is not None and pred.a_in > 0:
        band = min(band, 0.4 * (pred.a_out - pred.a_in) / pred.a_out)
    return pred.a_out, band


def classify(
    p: ModelParams,
    s: float,
    cfg: ClassifierConfig = ClassifierConfig(),
    integrator: IntegratorConfig = IntegratorConfig(),
) -> ShotResult:
    """Decide whether boundary slope s produces a skin or extended state.

    Integrates in doubling length blocks, accumulating the IPR moments as
    it goes. Decision rules, in order of cheapness:

    * Lyapunov early exit: V drops below early_exit_V, decided skin.
    * Amplitude early exit: the last 8 turning amplitudes agree to within
      2% of their mean and sit inside the (tightened) band around the
      predicted outer-cycle amplitude, decided extended.
    * D2 doubling: successive length-doubled D2 estimates agree within
      0.05 and sit on the same side of d2_threshold.

    Exhausting max_doublings without any of these leaves the shot
    undecided; near-separatrix slopes are expected to do so and the caller
    sees it explicitly. The flow is odd, so the sign of s is immaterial.
    """
    slope = float(s)
    s_mag = abs(slope)
    v0 = 0.5 * s_mag * s_mag
    if v0 <= cfg.early_exit_V:
        return ShotResult(slope, "skin", 0.0, 1.0, None, 0.0)

    base = cfg.effective_base_length(p)
    total = base * 2 ** cfg.max_doublings
    run_cfg = IntegratorConfig(
        rel_tol=integrator.rel_tol, abs_tol=integrator.abs_tol,
        max_step=integrator.max_step, max_x=1.01 * total,
    )
    a_out_th, band = _theory_band(p, cfg.early_exit_band)

    events = [turning_point(), lyapunov_below(cfg.early_exit_V, terminal=True)]
    state = PhaseState(0.0, s_mag)
    x_now = 0.0
    i2 = 0.0
    i4 = 0.0
    turn_amps: list[float] = []
    d2_prev: Optional[float] = None
    d2_last = 0.0
    ipr_last = 1.0

    sub = 0.25 * base
    checkpoints = [base * 2 ** k for k in range(cfg.max_doublings + 1)]
    for L_target in checkpoints:
        while x_now < L_target:
            seg = integrate(
                p, state, (x_now, min(x_now + sub, L_target)),
                run_cfg, events=events)
            seg_i2, seg_i4 = _accumulate_moments(seg, seg.x_end)
            i2 += seg_i2
            i4 += seg_i4
            turn_amps.extend(
                abs(e.state.psi) for e in seg.events_of("turning_point"))

            if seg.terminated_by == "lyapunov_below":
                x_dec = seg.x_end
                if i2 > 0 and x_dec > 1:
                    ipr_last = i4 / (i2 * i2)
                    d2_last = max(0.0, fractal_dimension(ipr_last, x_dec))
                return ShotResult(slope, "skin", d2_last, ipr_last, None, x_dec)

            if (
                a_out_th is not None
                and band > 0
                and len(turn_amps) >= _TAIL_TURNINGS
            ):
                tail = np.array(turn_amps[-_TAIL_TURNINGS:])
                mean = float(np.mean(tail))
                if (
                    mean > 0
                    and turning_amplitude_spread(tail) < 0.02
                    and abs(mean - a_out_th) / a_out_th < band
                ):
                    x_dec = seg.x_end
                    ipr_last = i4 / (i2 * i2)
                    d2_last = max(0.0, fractal_dimension(ipr_last, x_dec))
                    return ShotResult(
                        slope, "extended", d2_last, ipr_last, mean, x_dec)

            state = seg.end_state
            x_now = seg.x_end

        ipr_last = i4 / (i2 * i2)
        d2_last = max(0.0, fractal_dimension(ipr_last, x_now))
        if d2_prev is not None and abs(d2_last - d2_prev) < 0.05:
            below_now = d2_last < cfg.d2_threshold
            below_prev = d2_prev < cfg.d2_threshold
            if below_now and below_prev:
                return ShotResult(slope, "skin", d2_last, ipr_last, None, x_now)
            if not below_now and not below_prev and turn_amps:
                amp = float(np.mean(np.array(turn_amps[-_TAIL_TURNINGS:])))
                if amp > 0:
                    return ShotResult(slope, "extended", d2_last, ipr_last, amp, x_now)
        d2_prev = d2_last

    return ShotResult(slope, "undecided", d2_last, ipr_last, None, x_now)
