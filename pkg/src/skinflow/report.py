"""Dataset assembly and emission for every command.

A Dataset is columns + rows + a metadata dict; serialization is CSV with a
single `#`-prefixed JSON metadata line (17-significant-digit floats,
byte-identical for identical configs) or a JSON mirror with columns as
arrays. Every dataset embeds the full effective configuration so an
output file is self-describing.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import basin as basin_mod
from .classify import ClassifierConfig, classify, shoot
from .config import RunConfig, require, to_text
from .cycles import (
    Branch,
    amplitude_from_section,
    continue_branch,
    find_cycle,
    locate_fold,
    return_map,
)
from .errors import ConfigError, NoFoldInBranch, NumericalError, UnknownFigure
from .integrate import IntegratorConfig
from .model import ModelParams, PhaseState
from .sweep import quasi_static_sweep
from .theory import branch_amplitudes, gamma_c_theory

__all__ = [
    "Dataset",
    "to_csv",
    "to_json",
    "write_dataset",
    "build_predict",
    "build_bifurcation",
    "build_trajectory",
    "build_basin",
    "build_sweep",
    "build_reproduce",
    "FIGURES",
]


@dataclass
class Dataset:
    kind: str
    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    text = str(value)
    if "," in text or "\n" in text:
        raise ValueError(f"cell value {text!r} would break the CSV")
    return text


def _sanitize(obj):
    """Replace NaN/inf with None so metadata stays strict-JSON."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def to_csv(ds: Dataset) -> str:
    header = {"kind": ds.kind, **ds.metadata}
    lines = ["# " + json.dumps(_sanitize(header), sort_keys=True)]
    lines.append(",".join(ds.columns))
    for row in ds.rows:
        lines.append(",".join(_fmt_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def to_json(ds: Dataset) -> str:
    columns = {
        name: [_sanitize(row[i]) for row in ds.rows]
        for i, name in enumerate(ds.columns)
    }
    doc = {
        "metadata": _sanitize({"kind": ds.kind, **ds.metadata}),
        "columns": columns,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_dataset(ds: Dataset, path: Path, fmt: str) -> Path:
    text = to_csv(ds) if fmt == "csv" else to_json(ds)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return path


def config_digest(cfg: RunConfig) -> str:
    return hashlib.sha256(to_text(cfg).encode("utf-8")).hexdigest()


def _base_metadata(cfg: RunConfig) -> dict:
    return {"config": to_text(cfg), "config_sha256": config_digest(cfg)}


def _require_branch_family(cfg: RunConfig) -> None:
    require(cfg, "model.a", lambda v: v > 0,
            "branch prediction needs model.a > 0")
    require(cfg, "model.b", lambda v: v > 0,
            "branch prediction needs model.b > 0")


def _gamma_grid(cfg: RunConfig, prefix: str) -> np.ndarray:
    lo = cfg.get(f"{prefix}.gamma_min")
    hi = cfg.get(f"{prefix}.gamma_max")
    n = cfg.get(f"{prefix}.n_points")
    if n < 1:
        raise ConfigError(f"{prefix}.n_points must be at least 1, got {n}")
    if n == 1:
        if lo != hi:
            raise ConfigError(
                f"{prefix}: a single point needs gamma_min == gamma_max")
        return np.array([lo])
    if not lo < hi:
        raise ConfigError(
            f"{prefix}: empty gamma range [{lo}, {hi}]")
    return np.linspace(lo, hi, n)


def build_predict(cfg: RunConfig) -> Dataset:
    """Theory table: branch amplitudes and regime over a gamma grid."""
    _require_branch_family(cfg)
    grid = _gamma_grid(cfg, "predict")
    rows = []
    for gamma in grid:
        pred = branch_amplitudes(cfg.model.with_gamma(float(gamma)))
        rows.append((
            float(gamma),
            pred.a_in,
            pred.a_out,
            pred.regime,
            pred.validity,
        ))
    meta = _base_metadata(cfg)
    meta["gamma_c_theory"] = gamma_c_theory(cfg.model)
    return Dataset(
        kind="predict",
        columns=["gamma", "a_in", "a_out", "regime", "validity"],
        rows=rows,
        metadata=meta,
    )


def _theory_reference(p: ModelParams, stability: str) -> Optional[float]:
    """Averaged amplitude of the branch the point sits on, None when the
    stability label cannot identify the branch (fold and Hopf ends)."""
    pred = branch_amplitudes(p)
    if stability == "stable":
        return pred.a_out
    if stability == "unstable":
        return pred.a_in
    return None


def build_bifurcation(cfg: RunConfig) -> Dataset:
    """Continuation branch with theory overlay and fold row."""
    _require_branch_family(cfg)
    require(cfg, "bifurcation.step", lambda v: v > 0, "step must be positive")
    require(cfg, "bifurcation.refine_tol", lambda v: v > 0,
            "refine_tol must be positive")
    gamma_start = cfg.get("bifurcation.gamma_start")
    gamma_stop = cfg.get("bifurcation.gamma_stop")
    if gamma_stop >= gamma_start:
        raise ConfigError(
            "bifurcation.gamma_stop must lie below gamma_start "
            f"(got {gamma_stop} >= {gamma_start})")
    p_start = cfg.model.with_gamma(gamma_start)
    seed_pred = branch_amplitudes(p_start)
    if seed_pred.a_out is None:
        raise ConfigError(
            f"bifurcation.gamma_start = {gamma_start} has no oscillating "
            "branch to seed from")
    integrator = cfg.integrator

    cycle = find_cycle(p_start, p_start.omega() * seed_pred.a_out, integrator)
    branch = continue_branch(
        cfg.model, gamma_start, cycle,
        step=cfg.get("bifurcation.step"),
        gamma_stop=gamma_stop,
        cfg=integrator,
        max_steps=cfg.get("bifurcation.max_steps"),
    )

    fold: Optional[tuple[float, float]] = None
    fold_error: Optional[NumericalError] = None
    try:
        fold = locate_fold(branch, cfg.get("bifurcation.refine_tol"), integrator)
    except NoFoldInBranch:
        fold = None
    except NumericalError as exc:
        fold_error = exc

    columns = ["gamma", "s_fixed", "period", "amplitude", "multiplier",
               "stability", "a_theory", "deviation", "at_fold"]
    rows = []
    for gamma, lc in branch.points:
        a_th = _theory_reference(cfg.model.with_gamma(gamma), lc.stability)
        deviation = (
            (lc.amplitude - a_th) / a_th if a_th else None
        )
        rows.append((gamma, lc.s_fixed, lc.period, lc.amplitude,
                     lc.multiplier, lc.stability, a_th, deviation, False))

    meta = _base_metadata(cfg)
    meta["gamma_c_theory"] = gamma_c_theory(cfg.model)
    meta["n_branch_points"] = len(branch.points)
    if fold is not None:
        gamma_c, s_c = fold
        p_c = cfg.model.with_gamma(gamma_c)
        s_back, period_c = return_map(p_c, s_c, integrator)
        amp_c = amplitude_from_section(p_c, s_c, period_c, integrator)
        # the fold row goes where s_c falls in the traversal's s-ordering
        s_vals = [lc.s_fixed for _, lc in branch.points]
        if s_vals[0] > s_vals[-1]:
            insert_at = next(
                (i for i, s in enumerate(s_vals) if s < s_c), len(s_vals))
        else:
            insert_at = next(
                (i for i, s in enumerate(s_vals) if s > s_c), len(s_vals))
        rows.insert(insert_at, (
            gamma_c, s_c, period_c, amp_c, 1.0, "nonhyperbolic",
            math.sqrt(cfg.model.a / cfg.model.b), None, True))
        meta["gamma_c_numeric"] = gamma_c
        meta["s_c_numeric"] = s_c
        meta["fold_residual"] = abs(s_back - s_c)
    else:
        meta["gamma_c_numeric"] = None
        meta["s_c_numeric"] = None

    ds = Dataset(kind="bifurcation", columns=columns, rows=rows, metadata=meta)
    if fold_error is not None:
        fold_error.partial = ds
        raise fold_error
    return ds


def build_trajectory(cfg: RunConfig) -> Dataset:
    """Dense-sampled shot with classification summary metadata."""
    p = cfg.model
    s = cfg.get("trajectory.s")
    length = cfg.get("trajectory.length")
    if length is None:
        length = 100.0 * p.period()
    if length <= 0:
        raise ConfigError("trajectory.length must be positive")
    n_samples = cfg.get("trajectory.n_samples")
    if n_samples < 2:
        raise ConfigError("trajectory.n_samples must be at least 2")

    traj = shoot(p, s, length, cfg.integrator)
    xs = np.linspace(0.0, traj.x_end, n_samples)
    states = traj.dense(xs)
    v_scale = p.omega()
    rows = [
        (float(x), float(psi), float(v), float(v / v_scale))
        for x, psi, v in zip(xs, states[0], states[1])
    ]

    result = classify(p, s, cfg.classifier, cfg.integrator)
    meta = _base_metadata(cfg)
    meta.update({
        "outcome": result.outcome,
        "d2": result.d2,
        "ipr": result.ipr,
        "transit_length": result.transit_length,
        "asymptotic_amplitude": result.asymptotic_amplitude,
    })
    try:
        pred = branch_amplitudes(p)
        meta["a_in_theory"] = pred.a_in
        meta["a_out_theory"] = pred.a_out
    except ValueError:
        meta["a_in_theory"] = None
        meta["a_out_theory"] = None
    return Dataset(
        kind="trajectory",
        columns=["x", "psi", "v", "v_norm"],
        rows=rows,
        metadata=meta,
    )


def _density_from_config(cfg: RunConfig) -> basin_mod.SlopeDensity:
    density_file = cfg.get("basin.density_file")
    if density_file is not None:
        try:
            table = np.loadtxt(density_file)
        except (OSError, ValueError) as exc:
            raise ConfigError(
                f"basin.density_file {density_file}: {exc}") from None
        if table.ndim != 2 or table.shape[1] != 2:
            raise ConfigError(
                "basin.density_file must have two columns: slope, density")
        try:
            return basin_mod.SlopeDensity.tabulated(table[:, 0], table[:, 1])
        except ValueError as exc:
            raise ConfigError(f"basin.density_file invalid: {exc}") from None
    s0 = cfg.get("basin.density_s0")
    if s0 is None:
        s0 = cfg.model.omega()
    try:
        return basin_mod.SlopeDensity.cauchy(s0)
    except ValueError as exc:
        raise ConfigError(f"basin.density_s0 invalid: {exc}") from None


def _basin_point_task(args) -> basin_mod.BasinPoint:
    p_base, gamma, density, clf, gamma_c, tol_s, integrator = args
    return basin_mod.basin_point(
        p_base, gamma, density, clf, gamma_c, tol_s, integrator)


def build_basin(cfg: RunConfig, workers: int = 1) -> Dataset:
    """Phase-diagram dataset: s*, p_skin per gamma plus the fold jump."""
    _require_branch_family(cfg)
    require(cfg, "basin.tol_s", lambda v: v > 0, "tol_s must be positive")
    require(cfg, "basin.jump_delta", lambda v: v > 0,
            "jump_delta must be positive")
    grid = _gamma_grid(cfg, "basin")
    density = _density_from_config(cfg)
    integrator = cfg.integrator
    clf = cfg.classifier
    tol_s = cfg.get("basin.tol_s")

    gamma_c, s_c = basin_mod.numeric_fold(cfg.model, integrator=integrator)

    tasks = [
        (cfg.model, float(g), density, clf, gamma_c, tol_s, integrator)
        for g in grid
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_basin_point_task, tasks))
    else:
        points = [_basin_point_task(t) for t in tasks]

    rows = [
        (pt.gamma, pt.s_star, pt.p_skin, pt.bisection_width, pt.note or "")
        for pt in points
    ]

    meta = _base_metadata(cfg)
    meta["gamma_c_numeric"] = gamma_c
    meta["s_c_numeric"] = s_c
    meta["density"] = (
        {"kind": "cauchy", "s0": density.s0}
        if density.kind == "cauchy"
        else {"kind": "tabulated", "n_nodes": int(density.grid.size)}
    )
    meta["jump_at_fold"] = basin_mod.jump_at_fold(
        cfg.model, density, clf,
        gamma_c=gamma_c, delta=cfg.get("basin.jump_delta"),
        integrator=integrator,
    )
    inside = [pt for pt in points if pt.note is None and gamma_c <= pt.gamma < 0]
    below = [pt for pt in points if pt.gamma < gamma_c]
    if inside and below:
        meta["jump_between_grid_flanks"] = 1.0 - inside[0].p_skin
    return Dataset(
        kind="basin",
        columns=["gamma", "s_star", "p_skin", "bisection_width", "note"],
        rows=rows,
        metadata=meta,
    )


def build_sweep(cfg: RunConfig) -> list[tuple[str, Dataset]]:
    """Quasi-static sweep datasets, one per requested direction."""
    _require_branch_family(cfg)
    lo = cfg.get("sweep.gamma_min")
    hi = cfg.get("sweep.gamma_max")
    if not lo < hi:
        raise ConfigError(f"sweep: empty gamma range [{lo}, {hi}]")
    n_steps = cfg.get("sweep.n_steps")
    if n_steps < 10:
        raise ConfigError(
            f"sweep.n_steps must be at least 10, got {n_steps}")
    relax = cfg.get("sweep.relax_periods")
    if relax < 20:
        raise ConfigError(
            f"sweep.relax_periods must be at least 20, got {relax}")
    relax_length = relax * cfg.model.period()
    perturbation = cfg.get("sweep.perturbation")
    skin_threshold = cfg.get("sweep.skin_threshold")
    directions = cfg.get("sweep.directions")
    wanted = ["down", "up"] if directions == "both" else [directions]

    out: list[tuple[str, Dataset]] = []
    for direction in wanted:
        if direction == "down":
            gamma_from, gamma_to = hi, lo
            pred = branch_amplitudes(cfg.model.with_gamma(hi))
            init = (
                PhaseState(0.0, cfg.model.omega() * pred.a_out)
                if pred.a_out is not None
                else None
            )
        else:
            gamma_from, gamma_to = lo, hi
            init = None
        result = quasi_static_sweep(
            cfg.model, gamma_from, gamma_to,
            n_steps=n_steps, relax_length=relax_length, init=init,
            cfg=cfg.integrator, skin_threshold=skin_threshold,
            perturbation=perturbation,
        )
        rows = [
            (r.gamma, r.end_state.psi, r.end_state.v,
             r.amplitude_estimate, r.label)
            for r in result.records
        ]
        meta = _base_metadata(cfg)
        meta.update({
            "direction": result.direction,
            "switch_gamma": result.switch_gamma,
            "relax_length": relax_length,
            "n_steps": n_steps,
            "perturbation": perturbation,
        })
        out.append((direction, Dataset(
            kind="sweep",
            columns=["gamma", "psi_end", "v_end", "amplitude_estimate", "label"],
            rows=rows,
            metadata=meta,
        )))
    return out


_FIG2_PROFILES = [
    (-1.2, 6.0),
    (-0.5, 7.0),
    (-0.5, 8.69755),
    (-0.5, 8.69756),
    (-0.5, 10.0),
    (0.2, 2.0),
]
_FIG2_PORTRAITS = [(-1.2, 6.0), (-0.5, 10.0), (0.2, 2.0)]

FIGURES = ("fig1", "fig2", "fig3", "fig4")


def _slug(gamma: float, s: float) -> str:
    return f"g{gamma:g}_s{s:g}".replace("-", "m").replace(".", "p")


def build_reproduce(
    figure_id: str, cfg: RunConfig, workers: int = 1
) -> list[tuple[str, Dataset]]:
    """Canonical datasets for one figure of the reference parameter set."""
    if figure_id not in FIGURES:
        raise UnknownFigure(
            f"unknown figure {figure_id!r}; expected one of {', '.join(FIGURES)}")
    if figure_id in ("fig1", "fig3"):
        ds = build_bifurcation(cfg)
        ds.metadata["figure"] = figure_id
        if figure_id == "fig3":
            ds.kind = "bifurcation_comparison"
        return [("bifurcation", ds)]
    if figure_id == "fig2":
        out = []
        for gamma, s in _FIG2_PROFILES:
            case = cfg.replaced(model__gamma=gamma, trajectory__s=s)
            ds = build_trajectory(case)
            ds.metadata["figure"] = "fig2"
            out.append((f"profile_{_slug(gamma, s)}", ds))
        for gamma, s in _FIG2_PORTRAITS:
            case = cfg.replaced(model__gamma=gamma, trajectory__s=s)
            ds = build_trajectory(case)
            ds.kind = "portrait"
            ds.metadata["figure"] = "fig2"
            out.append((f"portrait_{_slug(gamma, s)}", ds))
        return out
    ds = build_basin(cfg, workers=workers)
    ds.metadata["figure"] = "fig4"
    return [("basin", ds)]


def reproduce_manifest(
    figure_id: str,
    cfg: RunConfig,
    files: Sequence[str],
    runtimes: dict[str, float],
) -> str:
    doc = {
        "figure": figure_id,
        "config": to_text(cfg),
        "config_sha256": config_digest(cfg),
        "files": list(files),
        "runtimes_s": {k: round(v, 3) for k, v in runtimes.items()},
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - start
