"""Figure rendering companions for the emitted datasets.

Every dataset kind gets a renderer that draws the conventional view of
that analysis: branch diagrams with stability styling, profile/portrait
panels with cycle guide lines, the phase diagram with its jump, and the
hysteresis loop. Rendering is headless (Agg) and file-only.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .report import Dataset  # noqa: E402

__all__ = ["render_dataset", "render_sweep_pair"]


def _column(ds: Dataset, name: str) -> list:
    idx = ds.columns.index(name)
    return [row[idx] for row in ds.rows]


def _finite_mask(values) -> list[bool]:
    return [isinstance(v, (int, float)) and math.isfinite(v) for v in values]


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _render_predict(ds: Dataset, path: Path) -> Path:
    gamma = _column(ds, "gamma")
    a_in = _column(ds, "a_in")
    a_out = _column(ds, "a_out")
    fig, ax = plt.subplots(figsize=(6, 4))
    ok_in = _finite_mask(a_in)
    ok_out = _finite_mask(a_out)
    ax.plot([g for g, m in zip(gamma, ok_out) if m],
            [a for a, m in zip(a_out, ok_out) if m],
            "-", color="tab:red", label="outer branch (theory)")
    ax.plot([g for g, m in zip(gamma, ok_in) if m],
            [a for a, m in zip(a_in, ok_in) if m],
            "--", color="tab:green", label="inner branch (theory)")
    g_c = ds.metadata.get("gamma_c_theory")
    if g_c is not None:
        ax.axvline(g_c, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("gamma")
    ax.set_ylabel("amplitude")
    ax.set_title("Averaged-theory branch amplitudes")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def _render_bifurcation(ds: Dataset, path: Path) -> Path:
    gamma = _column(ds, "gamma")
    amp = _column(ds, "amplitude")
    a_th = _column(ds, "a_theory")
    dev = _column(ds, "deviation")
    stab = _column(ds, "stability")
    at_fold = _column(ds, "at_fold")

    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(6, 6), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]})
    stable = [(g, a) for g, a, s in zip(gamma, amp, stab) if s == "stable"]
    unstab = [(g, a) for g, a, s in zip(gamma, amp, stab) if s == "unstable"]
    if stable:
        ax1.plot(*zip(*stable), "o-", color="tab:red", ms=3,
                 label="stable cycle (numeric)")
    if unstab:
        ax1.plot(*zip(*unstab), "s--", color="tab:green", ms=3,
                 label="unstable cycle (numeric)")
    ok = _finite_mask(a_th)
    ax1.plot([g for g, m in zip(gamma, ok) if m],
             [a for a, m in zip(a_th, ok) if m],
             ":", color="black", lw=1, label="theory")
    for g, a, f in zip(gamma, amp, at_fold):
        if f:
            ax1.plot([g], [a], "*", color="black", ms=12, label="fold")
    ax1.axhline(0, color="gray", lw=0.5)
    ax1.set_ylabel("amplitude")
    ax1.set_title("Cycle branches and fold")
    ax1.legend(fontsize=8)

    ok_dev = _finite_mask(dev)
    ax2.plot([g for g, m in zip(gamma, ok_dev) if m],
             [d for d, m in zip(dev, ok_dev) if m],
             ".-", color="tab:blue", ms=3)
    ax2.axhline(0, color="gray", lw=0.5)
    ax2.set_xlabel("gamma")
    ax2.set_ylabel("(A_num - A_th)/A_th")
    fig.tight_layout()
    return _save(fig, path)


def _render_trajectory(ds: Dataset, path: Path, portrait_only: bool = False) -> Path:
    x = _column(ds, "x")
    psi = _column(ds, "psi")
    v_norm = _column(ds, "v_norm")
    meta = ds.metadata
    guides = [meta.get("a_in_theory"), meta.get("a_out_theory")]

    if portrait_only:
        fig, ax_p = plt.subplots(figsize=(5, 5))
        axes = [ax_p]
    else:
        fig, (ax_x, ax_p) = plt.subplots(1, 2, figsize=(10, 4))
        axes = [ax_x, ax_p]
        ax_x.plot(x, psi, lw=0.7, color="tab:blue")
        for a, color in zip(guides, ("tab:green", "tab:red")):
            if a:
                ax_x.axhline(a, color=color, lw=0.8, ls="--")
                ax_x.axhline(-a, color=color, lw=0.8, ls="--")
        ax_x.set_xlabel("x")
        ax_x.set_ylabel("psi")
        ax_x.set_title(f"outcome: {meta.get('outcome', '?')}")

    ax_p.plot(psi, v_norm, lw=0.6, color="tab:blue")
    ax_p.plot([0], [0], "k.", ms=4)
    ax_p.set_xlabel("psi")
    ax_p.set_ylabel("v / omega")
    ax_p.set_title("phase portrait")
    ax_p.set_aspect("equal", adjustable="datalim")
    for ax in axes:
        ax.margins(x=0.02)
    fig.tight_layout()
    return _save(fig, path)


def _render_basin(ds: Dataset, path: Path) -> Path:
    gamma = _column(ds, "gamma")
    s_star = _column(ds, "s_star")
    p_skin = _column(ds, "p_skin")

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ok = _finite_mask(s_star)
    ax1.plot([g for g, m in zip(gamma, ok) if m],
             [s for s, m in zip(s_star, ok) if m],
             "o-", color="tab:purple", ms=3)
    ax1.set_ylabel("s*")
    ax1.set_title("Separatrix threshold and skin fraction")

    ok_p = _finite_mask(p_skin)
    ax2.plot([g for g, m in zip(gamma, ok_p) if m],
             [p for p, m in zip(p_skin, ok_p) if m],
             "o-", color="tab:orange", ms=3)
    g_c = ds.metadata.get("gamma_c_numeric")
    if g_c is not None:
        for ax in (ax1, ax2):
            ax.axvline(g_c, color="gray", lw=0.8, ls=":")
    ax2.set_ylim(-0.05, 1.05)
    ax2.set_xlabel("gamma")
    ax2.set_ylabel("p_skin")
    fig.tight_layout()
    return _save(fig, path)


def _render_sweep(ds: Dataset, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    _draw_sweep(ax, ds)
    ax.set_title(f"quasi-static sweep ({ds.metadata.get('direction')})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def _draw_sweep(ax, ds: Dataset) -> None:
    gamma = _column(ds, "gamma")
    amp = _column(ds, "amplitude_estimate")
    direction = ds.metadata.get("direction", "?")
    color = "tab:red" if direction == "down" else "tab:blue"
    ax.plot(gamma, amp, ".-", ms=3, color=color,
            label=f"{direction} sweep")
    switch = ds.metadata.get("switch_gamma")
    if switch is not None:
        ax.axvline(switch, color=color, lw=0.8, ls="--")
    ax.set_xlabel("gamma")
    ax.set_ylabel("tail amplitude")


def render_sweep_pair(down: Dataset, up: Dataset, path: Path) -> Path:
    """Hysteresis loop: both sweep directions on one axis."""
    fig, ax = plt.subplots(figsize=(6, 4))
    _draw_sweep(ax, down)
    _draw_sweep(ax, up)
    ax.set_title("hysteresis loop")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render_dataset(ds: Dataset, path: Path) -> Path:
    """Render the conventional figure for a dataset next to its data file."""
    kind = ds.kind
    if kind == "predict":
        return _render_predict(ds, path)
    if kind in ("bifurcation", "bifurcation_comparison"):
        return _render_bifurcation(ds, path)
    if kind == "trajectory":
        return _render_trajectory(ds, path)
    if kind == "portrait":
        return _render_trajectory(ds, path, portrait_only=True)
    if kind == "basin":
        return _render_basin(ds, path)
    if kind == "sweep":
        return _render_sweep(ds, path)
    raise ValueError(f"no renderer for dataset kind {kind!r}")
