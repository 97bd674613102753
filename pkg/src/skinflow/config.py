"""Run configuration: flat dotted-key text files, strict validation.

The format is deliberately plain so scientific runs stay reviewable:

    model.gamma = -0.5
    integrator.rel_tol = 1e-10
    basin.n_points = 33
    output.format = csv

One `key = value` per line, `#` comments, blank lines ignored. Every key
must exist in the schema (typos are rejected with the offending line
number), every omitted key takes its default, and emitting the effective
configuration with to_text() round-trips through parse exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .classify import ClassifierConfig
from .errors import ConfigError
from .integrate import IntegratorConfig
from .model import ModelParams

__all__ = ["RunConfig", "SCHEMA", "parse_config", "load_config", "to_text"]

_NONE = "none"

# key -> (kind, default). Kinds: float, int, bool, opt_float (the string
# "none" means absent), opt_str, or choice:a|b|c.
SCHEMA: dict[str, tuple[str, object]] = {
    "model.gamma": ("float", -0.5),
    "model.a": ("float", 0.5),
    "model.b": ("float", 0.03125),
    "model.E": ("float", 8.0),
    "integrator.rel_tol": ("float", 1e-10),
    "integrator.abs_tol": ("float", 1e-12),
    "integrator.max_step": ("float", math.inf),
    "integrator.max_x": ("opt_float", None),
    "classifier.base_length": ("opt_float", None),
    "classifier.max_doublings": ("int", 6),
    "classifier.d2_threshold": ("float", 0.5),
    "classifier.early_exit_V": ("float", 1e-16),
    "classifier.early_exit_band": ("float", 0.05),
    "predict.gamma_min": ("float", -1.2),
    "predict.gamma_max": ("float", 0.6),
    "predict.n_points": ("int", 46),
    "bifurcation.gamma_start": ("float", 0.5),
    "bifurcation.gamma_stop": ("float", -1.5),
    "bifurcation.step": ("float", 0.35),
    "bifurcation.refine_tol": ("float", 1e-6),
    "bifurcation.max_steps": ("int", 400),
    "trajectory.s": ("float", 8.69756),
    "trajectory.length": ("opt_float", None),
    "trajectory.n_samples": ("int", 2000),
    "basin.gamma_min": ("float", -1.3),
    "basin.gamma_max": ("float", 0.3),
    "basin.n_points": ("int", 33),
    "basin.tol_s": ("float", 1e-6),
    "basin.density_s0": ("opt_float", None),
    "basin.density_file": ("opt_str", None),
    "basin.jump_delta": ("float", 1e-3),
    "sweep.gamma_min": ("float", -1.5),
    "sweep.gamma_max": ("float", 0.5),
    "sweep.n_steps": ("int", 200),
    "sweep.relax_periods": ("float", 50.0),
    "sweep.perturbation": ("float", 1e-9),
    "sweep.skin_threshold": ("opt_float", None),
    "sweep.directions": ("choice:both|down|up", "both"),
    "run.workers": ("opt_int", None),
    "output.path": ("opt_str", None),
    "output.format": ("choice:csv|json", "csv"),
}


def _parse_value(key: str, kind: str, raw: str, where: str):
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "opt_float":
            return None if raw.lower() == _NONE else float(raw)
        if kind == "opt_int":
            return None if raw.lower() == _NONE else int(raw)
        if kind == "opt_str":
            return None if raw.lower() == _NONE else raw
        if kind == "bool":
            if raw.lower() in ("true", "false"):
                return raw.lower() == "true"
            raise ValueError("expected true or false")
        if kind.startswith("choice:"):
            options = kind.split(":", 1)[1].split("|")
            if raw in options:
                return raw
            raise ValueError(f"expected one of {', '.join(options)}")
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    raise ConfigError(f"schema defect: unknown kind {kind} for {key}")


def _format_value(value) -> str:
    if value is None:
        return _NONE
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    """Fully materialized configuration for one command invocation.

    settings holds every schema key (defaults applied); model, integrator,
    and classifier are the constructed section objects. Two RunConfigs are
    equivalent iff their settings agree.
    """

    settings: dict[str, object]
    model: ModelParams = field(compare=False)
    integrator: IntegratorConfig = field(compare=False)
    classifier: ClassifierConfig = field(compare=False)

    def get(self, key: str):
        return self.settings[key]

    def replaced(self, **overrides) -> "RunConfig":
        """New config with dotted keys (dots spelled as __) overridden."""
        updated = dict(self.settings)
        for name, value in overrides.items():
            key = name.replace("__", ".")
            if key not in SCHEMA:
                raise ConfigError(f"unknown config key {key}")
            updated[key] = value
        return from_settings(updated)


def from_settings(settings: dict[str, object]) -> RunConfig:
    try:
        model = ModelParams(
            gamma=settings["model.gamma"],
            a=settings["model.a"],
            b=settings["model.b"],
            E=settings["model.E"],
        )
    except ValueError as exc:
        raise ConfigError(f"model section invalid: {exc}") from None
    try:
        integrator = IntegratorConfig(
            rel_tol=settings["integrator.rel_tol"],
            abs_tol=settings["integrator.abs_tol"],
            max_step=settings["integrator.max_step"],
            max_x=settings["integrator.max_x"],
        )
    except ValueError as exc:
        raise ConfigError(f"integrator section invalid: {exc}") from None
    try:
        classifier = ClassifierConfig(
            base_length=settings["classifier.base_length"],
            max_doublings=settings["classifier.max_doublings"],
            d2_threshold=settings["classifier.d2_threshold"],
            early_exit_V=settings["classifier.early_exit_V"],
            early_exit_band=settings["classifier.early_exit_band"],
        )
    except ValueError as exc:
        raise ConfigError(f"classifier section invalid: {exc}") from None
    return RunConfig(
        settings=settings, model=model, integrator=integrator, classifier=classifier)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse flat key-value text into a RunConfig with defaults applied.

    Raises ConfigError naming the offending line for unknown keys,
    duplicate keys, malformed lines, or values that violate a section
    constraint.
    """
    settings: dict[str, object] = {key: default for key, (_, default) in SCHEMA.items()}
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        where = f"{source}:{lineno}"
        if "=" not in stripped:
            raise ConfigError(f"{where}: expected 'key = value', got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{where}: unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"{where}: duplicate key {key!r}")
        seen.add(key)
        kind, _ = SCHEMA[key]
        settings[key] = _parse_value(key, kind, raw, where)
    return from_settings(settings)


def load_config(path: Optional[str]) -> RunConfig:
    """RunConfig from a file path, or all defaults when path is None."""
    if path is None:
        return from_settings({key: default for key, (_, default) in SCHEMA.items()})
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=path)


def to_text(config: RunConfig) -> str:
    """Emit the effective configuration; parse_config(to_text(c)) == c."""
    lines = [
        f"{key} = {_format_value(config.settings[key])}"
        for key in sorted(config.settings)
    ]
    return "\n".join(lines) + "\n"


def require(config: RunConfig, key: str, predicate, constraint: str) -> None:
    """Validate one key against a command precondition."""
    if not predicate(config.settings[key]):
        raise ConfigError(f"{key} = {config.settings[key]} violates: {constraint}")
