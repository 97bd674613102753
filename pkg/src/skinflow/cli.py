"""Command-line interface.

    skinflow <command> [--config PATH] [--out PATH] [--format csv|json]
                       [--workers N]

Commands: predict, bifurcation, trajectory, basin, sweep, and
reproduce <fig1|fig2|fig3|fig4>. Each writes its dataset (CSV with a JSON
metadata header, or a JSON mirror) and renders the conventional figure to
a PNG next to it. Exit codes: 0 success, 2 configuration error, 3
numerical failure (partial output flushed when available), 4 unknown
command or figure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path
from typing import Optional

from . import plots
from .config import RunConfig, load_config
from .errors import ConfigError, NumericalError, SkinflowError, UnknownFigure
from .report import (
    FIGURES,
    build_basin,
    build_bifurcation,
    build_predict,
    build_sweep,
    build_trajectory,
    build_reproduce,
    reproduce_manifest,
    write_dataset,
)

__all__ = ["main"]

WORKERS_ENV = "SKINFLOW_WORKERS"

USAGE = """\
usage: skinflow <command> [--config PATH] [--out PATH] [--format csv|json] [--workers N]

commands:
  predict            closed-form branch amplitude table over a gamma grid
  bifurcation        numeric cycle continuation with fold refinement
  trajectory         one dense shot with classification summary
  basin              separatrix thresholds and skin fraction per gamma
  sweep              quasi-static hysteresis sweeps (down/up)
  reproduce <figN>   canonical dataset bundle for fig1..fig4

environment:
  SKINFLOW_WORKERS   default worker count for parallel scans
"""


def _build_parser(command: str) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=f"skinflow {command}", add_help=True)
    if command == "reproduce":
        parser.add_argument("figure_id", help="one of fig1, fig2, fig3, fig4")
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--out", default=None, help="output path (directory for reproduce)")
    parser.add_argument("--format", default=None, choices=("csv", "json"),
                        help="dataset format (default csv)")
    parser.add_argument("--workers", default=None, type=int,
                        help=f"parallel workers (default ${WORKERS_ENV} or 1)")
    return parser


def _resolve_workers(cfg: RunConfig) -> int:
    workers = cfg.get("run.workers")
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env is not None:
            try:
                workers = int(env)
            except ValueError:
                raise ConfigError(
                    f"{WORKERS_ENV}={env!r} is not an integer") from None
    if workers is None:
        workers = 1
    if workers < 1:
        raise ConfigError(f"worker count must be at least 1, got {workers}")
    return workers


def _out_path(cfg: RunConfig, default_stem: str) -> Path:
    fmt = cfg.get("output.format")
    configured = cfg.get("output.path")
    return Path(configured) if configured else Path(f"{default_stem}.{fmt}")


def _emit(ds, path: Path, fmt: str) -> None:
    write_dataset(ds, path, fmt)
    print(f"wrote {path}")
    png = plots.render_dataset(ds, path.with_suffix(".png"))
    print(f"wrote {png}")


def _cmd_predict(cfg: RunConfig, workers: int) -> int:
    ds = build_predict(cfg)
    _emit(ds, _out_path(cfg, "predict"), cfg.get("output.format"))
    return 0


def _cmd_bifurcation(cfg: RunConfig, workers: int) -> int:
    ds = build_bifurcation(cfg)
    _emit(ds, _out_path(cfg, "bifurcation"), cfg.get("output.format"))
    gamma_c = ds.metadata.get("gamma_c_numeric")
    if gamma_c is not None:
        print(f"fold: gamma_c = {gamma_c:.6f}")
    return 0


def _cmd_trajectory(cfg: RunConfig, workers: int) -> int:
    ds = build_trajectory(cfg)
    _emit(ds, _out_path(cfg, "trajectory"), cfg.get("output.format"))
    print(f"outcome: {ds.metadata['outcome']} "
          f"(transit {ds.metadata['transit_length']:.3g})")
    return 0


def _cmd_basin(cfg: RunConfig, workers: int) -> int:
    ds = build_basin(cfg, workers=workers)
    _emit(ds, _out_path(cfg, "basin"), cfg.get("output.format"))
    print(f"fold: gamma_c = {ds.metadata['gamma_c_numeric']:.6f}, "
          f"jump = {ds.metadata['jump_at_fold']:.4f}")
    return 0


def _cmd_sweep(cfg: RunConfig, workers: int) -> int:
    fmt = cfg.get("output.format")
    base = _out_path(cfg, "sweep")
    datasets = build_sweep(cfg)
    rendered = {}
    for direction, ds in datasets:
        path = (
            base if len(datasets) == 1
            else base.with_name(f"{base.stem}_{direction}{base.suffix}")
        )
        write_dataset(ds, path, fmt)
        print(f"wrote {path}")
        rendered[direction] = ds
        switch = ds.metadata.get("switch_gamma")
        label = f"{switch:.4f}" if switch is not None else "none"
        print(f"{direction} sweep switch_gamma: {label}")
    if len(rendered) == 2:
        png = plots.render_sweep_pair(
            rendered["down"], rendered["up"], base.with_suffix(".png"))
    else:
        (_, only), = rendered.items()
        png = plots.render_dataset(only, base.with_suffix(".png"))
    print(f"wrote {png}")
    return 0


def _cmd_reproduce(cfg: RunConfig, workers: int, figure_id: str) -> int:
    out_dir = cfg.get("output.path")
    bundle = Path(out_dir) if out_dir else Path(f"reproduce_{figure_id}")
    fmt = cfg.get("output.format")

    start = time.perf_counter()
    datasets = build_reproduce(figure_id, cfg, workers=workers)
    build_time = time.perf_counter() - start

    files: list[str] = []
    runtimes = {"build": build_time}
    for name, ds in datasets:
        path = bundle / f"{name}.{fmt}"
        write_dataset(ds, path, fmt)
        files.append(path.name)
        t0 = time.perf_counter()
        png = plots.render_dataset(ds, path.with_suffix(".png"))
        runtimes[f"render_{name}"] = time.perf_counter() - t0
        files.append(png.name)
        print(f"wrote {path}")
    manifest = bundle / "manifest.json"
    manifest.write_text(
        reproduce_manifest(figure_id, cfg, files, runtimes), encoding="utf-8")
    print(f"wrote {manifest}")
    return 0


_COMMANDS = {
    "predict": _cmd_predict,
    "bifurcation": _cmd_bifurcation,
    "trajectory": _cmd_trajectory,
    "basin": _cmd_basin,
    "sweep": _cmd_sweep,
    "reproduce": _cmd_reproduce,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = list(sys.argv[1:]) if argv is None else list(argv)
    if args and args[0] in ("-h", "--help"):
        print(USAGE)
        return 0
    if not args:
        print(USAGE, file=sys.stderr)
        return 4
    command = args[0]
    if command not in _COMMANDS:
        print(f"skinflow: unknown command {command!r}\n", file=sys.stderr)
        print(USAGE, file=sys.stderr)
        return 4

    parser = _build_parser(command)
    try:
        ns = parser.parse_args(args[1:])
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    try:
        cfg = load_config(ns.config)
        overrides = {}
        if ns.out is not None:
            overrides["output__path"] = ns.out
        if ns.format is not None:
            overrides["output__format"] = ns.format
        if ns.workers is not None:
            overrides["run__workers"] = ns.workers
        if overrides:
            cfg = cfg.replaced(**overrides)
        workers = _resolve_workers(cfg)
        if command == "reproduce":
            return _cmd_reproduce(cfg, workers, ns.figure_id)
        return _COMMANDS[command](cfg, workers)
    except ConfigError as exc:
        print(f"skinflow: config error: {exc}", file=sys.stderr)
        return 2
    except UnknownFigure as exc:
        print(f"skinflow: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"skinflow: config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None:
            path = _out_path(cfg, command)
            write_dataset(partial, path, cfg.get("output.format"))
            print(f"wrote partial output {path}", file=sys.stderr)
        print(f"skinflow: numerical failure: {exc}", file=sys.stderr)
        return 3
    except SkinflowError as exc:
        print(f"skinflow: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
