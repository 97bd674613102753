"""Adaptive eighth-order integration of the planar flow with event location.

A thin, typed wrapper around scipy's DOP853 (explicit embedded Runge-Kutta
of order 8(5,3), Dormand-Prince class) providing the three event kinds the
rest of the toolkit needs: crossings of the section {psi = 0}, turning
points {v = 0}, and downward crossings of a Lyapunov-value floor.  Event
abscissae are refined by scipy's root polishing on the dense output, well
inside 1e-12 in x.  Dense output is on by default; basin scans can turn it
off to bound memory (events only).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import MaxLengthExceeded, OutOfSpan, StepSizeUnderflow
from .model import ModelParams, PhaseState

__all__ = [
    "IntegratorConfig",
    "EventSpec",
    "TrajectoryEvent",
    "Trajectory",
    "integrate",
    "evaluate_dense",
    "section_crossing",
    "turning_point",
    "lyapunov_below",
]

EventKind = Literal["section_crossing", "turning_point", "lyapunov_below"]
Direction = Literal["ascending", "descending", "any"]

_DIRECTION_SIGN = {"ascending": 1.0, "descending": -1.0, "any": 0.0}


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and caps for one integration run.

    max_x is a hard cap on the end coordinate; None means 10000/omega,
    generous enough for worst-case near-separatrix transients while still
    catching runaway requests. Callers with longer legitimate needs (the
    classifier's length-doubling loop) raise it explicitly.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = float("inf")
    max_x: Optional[float] = None

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-3):
            raise ValueError(f"rel_tol must be in (0, 1e-3], got {self.rel_tol}")
        if not (0.0 < self.abs_tol <= 1e-3):
            raise ValueError(f"abs_tol must be in (0, 1e-3], got {self.abs_tol}")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")

    def effective_max_x(self, p: ModelParams) -> float:
        return 1e4 / p.omega() if self.max_x is None else self.max_x


@dataclass(frozen=True)
class EventSpec:
    """One scalar event to monitor along a trajectory.

    kind selects the event function g: "section_crossing" uses g = psi
    (ascending zeros are the section {psi=0, v>0}), "turning_point" uses
    g = v, "lyapunov_below" uses g = V - threshold. direction constrains
    the sign change of g; None picks the kind's natural default
    (ascending / any / descending respectively).
    """

    kind: EventKind
    direction: Optional[Direction] = None
    terminal: bool = False
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.kind == "lyapunov_below":
            if self.threshold is None or self.threshold <= 0:
                raise ValueError("lyapunov_below requires a positive threshold")
        elif self.threshold is not None:
            raise ValueError(f"threshold is only meaningful for lyapunov_below, not {self.kind}")

    def effective_direction(self) -> Direction:
        if self.direction is not None:
            return self.direction
        return {"section_crossing": "ascending",
                "turning_point": "any",
                "lyapunov_below": "descending"}[self.kind]  # type: ignore[return-value]


def section_crossing(terminal: bool = False) -> EventSpec:
    """Ascending crossing of {psi = 0}, i.e. psi = 0 with v > 0."""
    return EventSpec("section_crossing", terminal=terminal)


def turning_point(terminal: bool = False) -> EventSpec:
    """Any crossing of {v = 0}: extrema of psi along the trajectory."""
    return EventSpec("turning_point", terminal=terminal)


def lyapunov_below(threshold: float, terminal: bool = True) -> EventSpec:
    """Downward crossing of {V = threshold}: decay beneath an energy floor."""
    return EventSpec("lyapunov_below", terminal=terminal, threshold=threshold)


@dataclass(frozen=True)
class TrajectoryEvent:
    x: float
    state: PhaseState
    kind: EventKind


@dataclass
class Trajectory:
    """An integrated solution: accepted steps, located events, interpolant.

    states has shape (len(xs), 2) with columns (psi, v). dense is None in
    memory-bounded mode. Immutable by convention once returned.
    """

    xs: np.ndarray
    states: np.ndarray
    events: list[TrajectoryEvent] = field(default_factory=list)
    dense: Optional[object] = None
    terminated_by: Optional[EventKind] = None

    @property
    def x0(self) -> float:
        return float(self.xs[0])

    @property
    def x_end(self) -> float:
        return float(self.xs[-1])

    def state_at(self, k: int) -> PhaseState:
        return PhaseState(float(self.states[k, 0]), float(self.states[k, 1]))

    @property
    def end_state(self) -> PhaseState:
        return self.state_at(-1)

    def events_of(self, kind: EventKind) -> list[TrajectoryEvent]:
        return [e for e in self.events if e.kind == kind]


def _event_callable(p: ModelParams, spec: EventSpec, x0: float):
    gamma, a, b, e_coef = p.gamma, p.a, p.b, p.E

    if spec.kind == "section_crossing":
        def raw(y):
            return y[0]

        def drift(y):
            return y[1]
    elif spec.kind == "turning_point":
        def raw(y):
            return y[1]

        def drift(y):
            z = y[0] * y[0]
            return 2.0 * (gamma + a * z - b * z * z) * y[1] - 2.0 * e_coef * y[0]
    else:
        thr = spec.threshold

        def raw(y):
            return 0.5 * y[1] * y[1] + e_coef * y[0] * y[0] - thr

        def drift(y):
            z = y[0] * y[0]
            return 2.0 * (gamma + a * z - b * z * z) * y[1] * y[1]

    def g(x, y):
        val = raw(y)
        if val == 0.0 and x == x0:
            # Crossings count strictly after the start. When the run begins
            # exactly on the event surface, seed the solver's sign tracking
            # with the sign g takes infinitesimally later (its flow
            # derivative), so the initial point itself never fires.
            return drift(y)
        return val

    g.terminal = spec.terminal
    g.direction = _DIRECTION_SIGN[spec.effective_direction()]
    return g


def integrate(
    p: ModelParams,
    s0: PhaseState,
    x_span: tuple[float, float],
    cfg: IntegratorConfig = IntegratorConfig(),
    events: Sequence[EventSpec] = (),
    dense: bool = True,
) -> Trajectory:
    """Integrate the flow from s0 over x_span, locating the given events.

    Parameters
    ----------
    x_span : (x0, x1)
        Requires x0 < x1 <= cfg max_x (MaxLengthExceeded otherwise).
    events : sequence of EventSpec
        Terminal specs stop the run at their first occurrence. Crossings
        count strictly after x0: a run that starts exactly on an event
        surface does not fire at the start point.
    dense : bool
        Store the continuous interpolant (default). Disable for long
        event-only runs to keep memory flat.

    Returns
    -------
    Trajectory
        Accepted steps, merged chronological event list, and (optionally)
        the dense interpolant. ``terminated_by`` names the terminal event
        kind when one fired.

    Raises
    ------
    MaxLengthExceeded, StepSizeUnderflow
    """
    x0, x1 = float(x_span[0]), float(x_span[1])
    if not x0 < x1:
        raise ValueError(f"x_span must increase, got {x_span}")
    if x1 > cfg.effective_max_x(p):
        raise MaxLengthExceeded(
            f"x_span end {x1} exceeds max_x {cfg.effective_max_x(p)}")

    gamma, a, b, e2 = p.gamma, p.a, p.b, 2.0 * p.E

    def rhs(x, y):
        psi, v = y
        z = psi * psi
        return (v, 2.0 * (gamma + a * z - b * z * z) * v - e2 * psi)

    specs = list(events)
    callables = [_event_callable(p, s, x0) for s in specs]

    sol = solve_ivp(
        rhs,
        (x0, x1),
        s0.as_array(),
        method="DOP853",
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        dense_output=dense,
        events=callables or None,
    )
    if sol.status == -1:
        raise StepSizeUnderflow(f"integration failed at x={sol.t[-1]}: {sol.message}")

    recorded: list[TrajectoryEvent] = []
    terminated_by: Optional[EventKind] = None
    if specs:
        for spec, t_ev, y_ev in zip(specs, sol.t_events, sol.y_events):
            for x_e, y_e in zip(t_ev, y_ev):
                recorded.append(
                    TrajectoryEvent(float(x_e), PhaseState(float(y_e[0]), float(y_e[1])), spec.kind))
        recorded.sort(key=lambda e: e.x)
        if sol.status == 1:
            # the terminating event is the last one chronologically
            for spec, t_ev in zip(specs, sol.t_events):
                if spec.terminal and t_ev.size and np.isclose(t_ev[-1], sol.t[-1], rtol=0, atol=1e-9):
                    terminated_by = spec.kind
                    break

    return Trajectory(
        xs=sol.t,
        states=sol.y.T.copy(),
        events=recorded,
        dense=sol.sol if dense else None,
        terminated_by=terminated_by,
    )


def evaluate_dense(t: Trajectory, x: float) -> PhaseState:
    """Evaluate the interpolant at x within [x0, x_end]."""
    if t.dense is None:
        raise OutOfSpan("trajectory was integrated without dense output")
    if x < t.x0 or x > t.x_end:
        raise OutOfSpan(f"x={x} outside trajectory span [{t.x0}, {t.x_end}]")
    y = t.dense(x)
    return PhaseState(float(y[0]), float(y[1]))
