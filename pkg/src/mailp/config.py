"""Strict experiment configuration loading.

Configs are JSON objects.  Validation is schema-driven and rejects unknown
keys at every nesting level, so a typo can never silently change what an
experiment runs; every run's effective config (defaults filled in) is echoed
into the output metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class Field:
    kind: str                 # int | float | str | int_list | float_list | str_list | dict | dict_list
    required: bool = False
    default: object = None
    schema: dict | None = None


LAMBDA_SCHEMA = {
    "kind": Field("str", required=True),
    "beta": Field("float"),
    "c": Field("float"),
}

ENV_SCHEMA = {
    "grid_w": Field("int", default=16),
    "grid_h": Field("int", default=16),
    "n_pursuers": Field("int", default=8),
    "n_evaders": Field("int", default=30),
    "obs_range": Field("int", default=7),
    "max_steps": Field("int", default=500),
    "capture_reward": Field("float", default=5.0),
    "touch_reward": Field("float", default=0.01),
    "surround_rule": Field("str", default="all_open_cardinals"),
    "seed": Field("int", default=0),
}

TRAIN_SCHEMA = {
    "modes": Field("str_list", default=["shared", "independent"]),
    "episodes": Field("int", required=True),
    "learning_rate": Field("float", default=0.1),
    "discount": Field("float", default=0.99),
    "eps_start": Field("float", default=1.0),
    "eps_end": Field("float", default=0.05),
    "eps_decay_episodes": Field("int"),
    "eval_every": Field("int", default=1000),
    "eval_episodes": Field("int", default=30),
    "indication": Field("str", default="type"),
}

SCHEMAS: dict[str, dict[str, Field]] = {
    "bounds_sweep": {
        "kind": Field("str"),
        "out": Field("str"),
        "n": Field("int", required=True),
        "c_env": Field("float", required=True),
        "i0": Field("float", required=True),
        "eps": Field("float", required=True),
        "k_grid": Field("float_list", required=True),
    },
    "mailp_sim": {
        "kind": Field("str"),
        "out": Field("str"),
        "setting": Field("str", required=True),
        "n": Field("int"),
        "c_env": Field("float"),
        "k_star": Field("float"),
        "k_env": Field("float", default=1.0),
        "i0_star": Field("float"),
        "i0": Field("float"),
        "eps": Field("float", required=True),
        "learning_fn": Field("dict", default={"kind": "identity"}, schema=LAMBDA_SCHEMA),
        "max_t": Field("int", required=True),
    },
    "mailp_verify": {
        "kind": Field("str"),
        "out": Field("str"),
        "n_list": Field("int_list", default=[2, 3, 5]),
        "k_grid": Field("float_list", default=[k / 10 for k in range(1, 11)]),
        "lambdas": Field(
            "dict_list",
            default=[{"kind": "identity"}, {"kind": "scaled", "beta": 0.5}],
            schema=LAMBDA_SCHEMA,
        ),
        "c_env": Field("float", default=0.1),
        "i0_star": Field("float", default=0.01),
        "eps": Field("float", default=0.001),
        "k_env": Field("float", default=1.0),
        "max_t": Field("int", default=100000),
    },
    "posg_props": {
        "kind": Field("str"),
        "out": Field("str"),
        "instances": Field("int", default=1000),
        "seed": Field("int", default=0),
        "max_agents": Field("int", default=3),
        "max_states": Field("int", default=3),
        "max_actions": Field("int", default=3),
        "max_obs": Field("int", default=3),
    },
    "pursuit_random": {
        "kind": Field("str"),
        "out": Field("str"),
        "env": Field("dict", default={}, schema=ENV_SCHEMA),
        "episodes": Field("int", required=True),
        "seed": Field("int", required=True),
    },
    "pursuit_train": {
        "kind": Field("str"),
        "out": Field("str"),
        "env": Field("dict", required=True, schema=ENV_SCHEMA),
        "train": Field("dict", required=True, schema=TRAIN_SCHEMA),
        "seeds": Field("int_list", required=True),
        "policy_dir": Field("str"),
    },
    "pursuit_eval": {
        "kind": Field("str"),
        "out": Field("str"),
        "env": Field("dict", default={}, schema=ENV_SCHEMA),
        "policy_file": Field("str"),
        "episodes": Field("int", required=True),
        "seed": Field("int", required=True),
        "dump": Field("str"),
    },
}


def _check_scalar(value, kind: str, path: str):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected string, got {value!r}")
        return value
    raise ConfigError(f"{path}: unhandled field kind {kind!r}")


def validate(raw: dict, schema: dict[str, Field], path: str = "config") -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected an object, got {type(raw).__name__}")
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    out: dict = {}
    for name, spec in schema.items():
        here = f"{path}.{name}"
        if name not in raw:
            if spec.required:
                raise ConfigError(f"{here}: required key missing")
            if spec.default is None:
                continue
            value = spec.default
        else:
            value = raw[name]
        if spec.kind == "dict":
            out[name] = validate(value, spec.schema, here)
        elif spec.kind == "dict_list":
            if not isinstance(value, list):
                raise ConfigError(f"{here}: expected a list of objects")
            out[name] = [validate(v, spec.schema, f"{here}[{i}]") for i, v in enumerate(value)]
        elif spec.kind.endswith("_list"):
            if not isinstance(value, list):
                raise ConfigError(f"{here}: expected a list")
            element = spec.kind[: -len("_list")]
            out[name] = [_check_scalar(v, element, f"{here}[{i}]") for i, v in enumerate(value)]
        else:
            out[name] = _check_scalar(value, spec.kind, here)
    return out


def load_config(path, kind: str) -> dict:
    """Read and validate a JSON config for the given experiment kind."""
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    cfg = validate(raw, SCHEMAS[kind])
    declared = cfg.get("kind")
    if declared is not None and declared != kind:
        raise ConfigError(f"config declares kind {declared!r} but was run as {kind!r}")
    cfg["kind"] = kind
    return cfg


def parse_seed_spec(spec: str) -> list[int]:
    """Parse a seed list like '3', '0..9' or '1,4..6,12'."""
    seeds: list[int] = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            raise ConfigError(f"empty seed token in {spec!r}")
        if ".." in token:
            lo, _, hi = token.partition("..")
            try:
                lo_i, hi_i = int(lo), int(hi)
            except ValueError as exc:
                raise ConfigError(f"bad seed range {token!r}") from exc
            if hi_i < lo_i:
                raise ConfigError(f"seed range {token!r} is reversed")
            seeds.extend(range(lo_i, hi_i + 1))
        else:
            try:
                seeds.append(int(token))
            except ValueError as exc:
                raise ConfigError(f"bad seed {token!r}") from exc
    return seeds
