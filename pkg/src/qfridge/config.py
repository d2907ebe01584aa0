"""Experiment configuration: defaults, YAML loading, dotted overrides and schema validation."""

from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .errors import ConfigError

EXPERIMENTS = ("evolve", "steady", "single-shot", "sweep", "noise-ensemble", "validate")
MODELS = ("model1-strong", "model1-weak", "model2", "stochastic")

DEFAULTS: dict = {
    "experiment": "evolve",
    "params": {
        "e1": 1.0,
        "e2": 2.0,
        "e3": 1.0,
        "g": 0.2,
        "t_cold": 50.0,
        "t_room": 50.0,
        "t_hot": 100.0,
    },
    "bath": {
        "model": "model1-strong",
        "alpha": 1e-3,
        "omega_cutoff": 1e3,
        "gamma": None,
        "eta": 0.05,
    },
    "evolve": {
        "t_end": 60.0,
        "n_samples": 1201,
        "method": "auto",
        "models": None,
        "r_fractions": [0.0],
        "phi": 0.0,
    },
    "single_shot": {
        "t0_policy": "pi-over-2g",
        "t0": None,
        "r_fraction": 0.0,
        "phi": 0.0,
        "time_cap": None,
        "n_pre": 401,
        "n_post": 2001,
    },
    "sweep": {
        "t_rooms": [10.0, 30.0, 50.0],
        "hot_offsets": {"start": 1.0, "stop": 200.0, "num": 21},
        "r_fraction": 0.0,
        "phi": 0.0,
    },
    "noise": {
        "distribution": "gaussian",
        "variances": [0.01, 0.1, 0.5],
        "widths": [],
        "r_fraction": 0.05,
        "n_samples": None,
        "t_end": None,
        "n_points": 801,
        "dissipation_scale": 1.0,
    },
    "seed": 0,
    "output": {"dir": "qfridge-out", "format": "csv"},
    "tolerances": {"hermiticity": 1e-12, "trace": 1e-10, "positivity": 1e-9},
}

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NULLABLE_POS = {"type": ["number", "null"], "exclusiveMinimum": 0}


def _obj(props: dict, required=()) -> dict:
    return {
        "type": "object",
        "properties": props,
        "additionalProperties": False,
        "required": list(required),
    }


SCHEMA: dict = _obj(
    {
        "experiment": {"enum": list(EXPERIMENTS)},
        "params": _obj(
            {
                "e1": _POS,
                "e2": _POS,
                "e3": _POS,
                "g": {"type": "number", "minimum": 0},
                "t_cold": _POS,
                "t_room": _POS,
                "t_hot": _POS,
            }
        ),
        "bath": _obj(
            {
                "model": {"enum": list(MODELS)},
                "alpha": _POS,
                "omega_cutoff": _POS,
                "gamma": _NULLABLE_POS,
                "eta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            }
        ),
        "evolve": _obj(
            {
                "t_end": _POS,
                "n_samples": {"type": "integer", "minimum": 2},
                "method": {"enum": ["auto", "expm", "ode"]},
                "models": {
                    "type": ["array", "null"],
                    "items": {"enum": list(MODELS)},
                    "minItems": 1,
                },
                "r_fractions": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                },
                "phi": _NUM,
            }
        ),
        "single_shot": _obj(
            {
                "t0_policy": {"enum": ["auto", "fixed", "pi-over-2g"]},
                "t0": _NULLABLE_POS,
                "r_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "phi": _NUM,
                "time_cap": _NULLABLE_POS,
                "n_pre": {"type": "integer", "minimum": 2},
                "n_post": {"type": "integer", "minimum": 2},
            }
        ),
        "sweep": _obj(
            {
                "t_rooms": {"type": "array", "items": _POS, "minItems": 1},
                "hot_offsets": _obj(
                    {
                        "start": _POS,
                        "stop": _POS,
                        "num": {"type": "integer", "minimum": 1},
                    },
                    required=("start", "stop", "num"),
                ),
                "r_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "phi": _NUM,
            }
        ),
        "noise": _obj(
            {
                "distribution": {"enum": ["gaussian", "uniform"]},
                "variances": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                },
                "widths": {
                    "type": "array",
                    "items": {
                        "type": "number",
                        "minimum": 0,
                        "maximum": 6.283185307179586,
                    },
                },
                "r_fraction": {
                    "type": "number",
                    "exclusiveMinimum": 0,
                    "exclusiveMaximum": 1,
                },
                "n_samples": {"type": ["integer", "null"], "minimum": 1},
                "t_end": _NULLABLE_POS,
                "n_points": {"type": "integer", "minimum": 3},
                "dissipation_scale": {"type": "number", "minimum": 0},
            }
        ),
        "seed": {"type": "integer", "minimum": 0},
        "output": _obj(
            {"dir": {"type": "string"}, "format": {"enum": ["csv", "summary"]}}
        ),
        "tolerances": _obj({"hermiticity": _POS, "trace": _POS, "positivity": _POS}),
    }
)


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_override(text: str) -> dict:
    """``"a.b.c=value"`` -> ``{"a": {"b": {"c": value}}}`` with YAML-typed values."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"override {text!r} has an empty key")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value in override {text!r}: {exc}") from exc
    out: dict = {}
    node = out
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value
    return out


def load_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return data


def validate(config: dict) -> None:
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc


def resolve(file_config: dict | None = None, overrides: list[str] | tuple = ()) -> dict:
    """Defaults < file < overrides, then schema-validated."""
    partial = copy.deepcopy(file_config or {})
    for text in overrides:
        partial = deep_merge(partial, parse_override(text))
    validate(partial)
    config = deep_merge(DEFAULTS, partial)
    validate(config)
    return config


def config_hash(config: dict, version: str) -> str:
    payload = json.dumps(
        {"config": config, "version": version}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(payload.encode()).hexdigest()


PRESET_NAMES = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "fig4")


def figure_recipes() -> dict[str, Path]:
    """Shipped preset configs keyed by figure name."""
    root = resources.files("qfridge") / "presets"
    return {name: Path(str(root / f"{name}.yaml")) for name in PRESET_NAMES}


def load_preset(name: str) -> dict:
    recipes = figure_recipes()
    if name not in recipes:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(recipes)}")
    return load_file(recipes[name])


def write_schema(path: str | Path) -> None:
    Path(path).write_text(json.dumps(SCHEMA, indent=2) + "\n")
