"""Quasi-static parameter sweeps and the hysteresis loop.

Adiabatic variation is operationalized as a stepwise-frozen protocol: hold
gamma, let the state relax for a fixed length, record where it settled,
carry it to the next gamma. Sweeping down, the oscillating state persists
until the fold destroys its attractor; sweeping up, the collapsed state
persists until the origin loses stability at gamma = 0. The two switch
points bound the hysteresis window.

A tiny deterministic state kick (relative size 1e-9, knob-controlled) is
injected after each step so that a just-destabilized state leaves within
one step instead of shadowing the ghost of its attractor for many steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .integrate import IntegratorConfig, integrate, turning_point
from .model import ModelParams, PhaseState, lyapunov_value

__all__ = ["SweepRecord", "SweepResult", "quasi_static_sweep"]

BranchLabel = Literal["on_extended_branch", "on_skin_branch"]
Direction = Literal["down", "up"]

_TAIL_TURNINGS = 8


@dataclass(frozen=True)
class SweepRecord:
    """State of the swept system after relaxing at one gamma."""

    gamma: float
    end_state: PhaseState
    amplitude_estimate: float
    label: BranchLabel

    def __post_init__(self):
        if self.amplitude_estimate < 0:
            raise ValueError("amplitude_estimate must be nonnegative")


@dataclass(frozen=True)
class SweepResult:
    """A full sweep: records in traversal order and the detected switch.

    switch_gamma is the midpoint of the gamma step at which the label
    first changes; None when the sweep never switches.
    """

    direction: Direction
    records: list[SweepRecord]
    switch_gamma: Optional[float]


def default_skin_threshold(p: ModelParams) -> float:
    """Amplitude below which a relaxed state counts as collapsed.

    A quarter of the fold amplitude sqrt(a/b): an order of magnitude under
    any surviving cycle, far above any genuinely decaying tail.
    """
    if p.a > 0 and p.b > 0:
        return 0.25 * math.sqrt(p.a / p.b)
    return 1e-3 * p.omega()


def _relax(
    p: ModelParams,
    state: PhaseState,
    relax_length: float,
    cfg: IntegratorConfig,
    v_floor: float,
) -> tuple[PhaseState, float, bool]:
    """Relax at frozen gamma; (end state, tail amplitude, V decreasing).

    Below v_floor the raw tail comparison would sample integrator noise,
    so a state pinned under the floor counts as decreasing: it has decayed
    onto the origin as far as the protocol can resolve.
    """
    traj = integrate(
        p, state, (0.0, relax_length), cfg,
        events=[turning_point()], dense=True,
    )
    turns = traj.events_of("turning_point")
    if turns:
        tail = turns[-_TAIL_TURNINGS:]
        amplitude = float(np.mean([abs(e.state.psi) for e in tail]))
    else:
        amplitude = abs(traj.end_state.psi)

    probe = traj.dense(0.8 * relax_length)
    v_tail_start = 0.5 * probe[1] ** 2 + p.E * probe[0] ** 2
    v_end = lyapunov_value(p, traj.end_state)
    return traj.end_state, amplitude, v_end < v_tail_start or v_end < v_floor


def quasi_static_sweep(
    p_base: ModelParams,
    gamma_from: float,
    gamma_to: float,
    n_steps: int = 200,
    relax_length: Optional[float] = None,
    init: Optional[PhaseState] = None,
    cfg: IntegratorConfig = IntegratorConfig(),
    skin_threshold: Optional[float] = None,
    perturbation: float = 1e-9,
) -> SweepResult:
    """Sweep gamma across a linear grid, relaxing the carried state at each.

    relax_length defaults to 50 harmonic periods (at least 20 required);
    n_steps is the number of grid points (at least 10). init defaults to
    the near-origin seed (0, 1e-3 omega) appropriate for up sweeps; down
    sweeps should start on the oscillating attractor. A record's label is
    on_skin_branch exactly when its tail amplitude is below skin_threshold
    and the Lyapunov value is still decreasing at the end of the relax
    segment. perturbation=0 disables the per-step state kick.
    """
    if n_steps < 10:
        raise ValueError(f"n_steps must be at least 10, got {n_steps}")
    period = p_base.period()
    if relax_length is None:
        relax_length = 50.0 * period
    if relax_length < 20.0 * period:
        raise ValueError("relax_length must cover at least 20 periods")
    if perturbation < 0:
        raise ValueError("perturbation must be nonnegative")
    omega = p_base.omega()
    if init is None:
        init = PhaseState(0.0, 1e-3 * omega)
    if skin_threshold is None:
        skin_threshold = default_skin_threshold(p_base)

    direction: Direction = "down" if gamma_to < gamma_from else "up"
    grid = np.linspace(gamma_from, gamma_to, n_steps)
    kick_scale = max(perturbation, cfg.abs_tol) * omega
    v_floor = (p_base.E + 0.5) * kick_scale**2

    records: list[SweepRecord] = []
    switch_gamma: Optional[float] = None
    state = init
    for gamma in grid:
        p = p_base.with_gamma(float(gamma))
        state, amplitude, v_decreasing = _relax(p, state, relax_length, cfg, v_floor)
        label: BranchLabel = (
            "on_skin_branch"
            if amplitude < skin_threshold and v_decreasing
            else "on_extended_branch"
        )
        records.append(SweepRecord(float(gamma), state, amplitude, label))
        if (
            switch_gamma is None
            and len(records) >= 2
            and records[-2].label != label
        ):
            switch_gamma = 0.5 * (records[-2].gamma + float(gamma))
        if perturbation > 0:
            kick = perturbation * max(abs(state.psi), abs(state.v), omega)
            state = PhaseState(state.psi + kick, state.v + kick)

    return SweepResult(direction=direction, records=records, switch_gamma=switch_gamma)
