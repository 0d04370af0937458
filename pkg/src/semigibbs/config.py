"""JSON experiment configs: schema validation, defaults, overrides and hashing."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Any, Iterable

import jsonschema

from .polynomials import parse_monomial


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending location."""


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POLY = {"type": "object", "propertyNames": {"pattern": r"^(1|([xyz]\d*)+)$"},
         "additionalProperties": _NUM}
_POS_LIST = {"type": "array", "items": _POS, "minItems": 1}
_N_LIST = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}


def _obj(props: dict, required: Iterable[str] = ()) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False,
            "required": list(required)}


DEFAULTS: dict[str, dict] = {
    "sphere-limit": {
        "N": [8, 16, 32, 64, 128, 256],
        "beta": [1.0],
        "h0": {"z": -1.0},
        "f": {"z": 1.0},
        "slack": 1e-9,
        "seed": 0,
    },
    "schrodinger-limit": {
        "hbar": [0.4, 0.2, 0.1, 0.05],
        "beta": [1.0],
        "potential": "double_well",
        "observable": {"amplitude": 1.0, "center": 1.0, "width": 1.0},
        "L": 8.0,
        "M": 1024,
        "slack": 1e-8,
        "seed": 0,
    },
    "lmg": {
        "N": [8, 16, 32, 64, 128, 256],
        "beta": [2.0],
        "lmg": {"lambda": -1.0, "gamma": 0.0, "B": 0.5},
        "observables": [{"x": 1.0}, {"x2": 1.0}, {"z": 1.0}],
        "subleading": [],
        "bruteforce_N": [8],
        "n_starts": 64,
        "gap_damping": 1.0,
        "probe": {"a0": {"x": 1.0}, "t": [-0.1, -0.01, -0.001, 0.0, 0.001, 0.01, 0.1]},
        "seed": 0,
    },
    "inequalities": {
        "seed": 0,
        "peierls_bogolyubov": {"pairs": 200, "max_dim": 50, "scale": 1.0},
        "kms": {"triples": 20, "degree": 3, "beta": [0.5, 1.0, 2.0]},
        "berezin_lieb": {"h0": [{"z": -1.0}, {"x2": 1.0, "z": -1.0}], "N": [8, 16, 32, 64],
                         "beta": [0.5, 1.0, 2.0], "slack": 1e-9},
    },
}

SCHEMAS: dict[str, dict] = {
    "sphere-limit": _obj({
        "suite": {"const": "sphere-limit"},
        "N": _N_LIST, "beta": _POS_LIST, "h0": _POLY, "f": _POLY, "slack": _POS,
        "seed": {"type": "integer"},
    }),
    "schrodinger-limit": _obj({
        "suite": {"const": "schrodinger-limit"},
        "hbar": _POS_LIST, "beta": _POS_LIST,
        "potential": {"oneOf": [
            {"enum": ["harmonic", "shifted_quadratic", "double_well"]},
            _obj({"coeffs": {"type": "array", "items": _NUM, "minItems": 2},
                  "name": {"type": "string"}}, ["coeffs"]),
        ]},
        "observable": _obj({"amplitude": _NUM, "center": _NUM, "width": _POS}),
        "L": _POS, "M": {"type": "integer", "minimum": 128, "multipleOf": 2},
        "slack": _POS, "seed": {"type": "integer"},
    }),
    "lmg": _obj({
        "suite": {"const": "lmg"},
        "N": _N_LIST, "beta": _POS_LIST,
        "lmg": _obj({"lambda": _NUM, "gamma": _NUM, "B": _NUM}),
        "observables": {"type": "array", "items": _POLY},
        "subleading": {"type": "array", "items": _POLY},
        "bruteforce_N": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 10}},
        "n_starts": {"type": "integer", "minimum": 1},
        "gap_damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "probe": {"oneOf": [{"type": "null"},
                            _obj({"a0": _POLY, "t": {"type": "array", "items": _NUM}})]},
        "seed": {"type": "integer"},
    }),
    "inequalities": _obj({
        "suite": {"const": "inequalities"},
        "seed": {"type": "integer"},
        "peierls_bogolyubov": _obj({"pairs": {"type": "integer", "minimum": 1},
                                    "max_dim": {"type": "integer", "minimum": 2}, "scale": _POS}),
        "kms": _obj({"triples": {"type": "integer", "minimum": 0},
                     "degree": {"type": "integer", "minimum": 1}, "beta": _POS_LIST}),
        "berezin_lieb": _obj({"h0": {"type": "array", "items": _POLY}, "N": _N_LIST,
                              "beta": _POS_LIST, "slack": _POS}),
    }),
}


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    params: dict
    hash: str

    def as_run_dict(self) -> dict:
        d = copy.deepcopy(self.params)
        d["_hash"] = self.hash
        return d

    def serialize(self) -> str:
        return canonical_json({"suite": self.suite, **self.params})


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(suite: str, params: dict) -> str:
    return hashlib.sha256(canonical_json({"suite": suite, **params}).encode()).hexdigest()


def _merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in update.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("h0", "f", "a0"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _pointer(path: Iterable) -> str:
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in path]
    return "/" + "/".join(parts)


def _valid_keys(schema: dict, path: Iterable) -> list[str]:
    node = schema
    for p in path:
        if isinstance(p, int):
            node = node.get("items", {})
        else:
            node = node.get("properties", {}).get(p, {})
        if "oneOf" in node:
            node = next((s for s in node["oneOf"] if s.get("type") == "object"), node)
    return sorted(node.get("properties", {}))


def _validate(suite: str, data: dict) -> None:
    schema = SCHEMAS[suite]
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        path = list(err.absolute_path)
        msg = f"{_pointer(path)}: {err.message}"
        if err.validator == "additionalProperties":
            msg += f" (valid keys: {', '.join(_valid_keys(schema, path))})"
        raise ConfigError(msg)


def _check_grids(params: dict) -> None:
    def increasing(key, values):
        if any(b <= a for a, b in zip(values[:-1], values[1:])):
            raise ConfigError(f"/{key}: values must be strictly increasing")

    if "N" in params:
        increasing("N", params["N"])
    if "hbar" in params:
        h = params["hbar"]
        if any(b >= a for a, b in zip(h[:-1], h[1:])):
            raise ConfigError("/hbar: values must be strictly decreasing")
    for key in ("h0", "f"):
        if key in params:
            for mono in params[key]:
                parse_monomial(mono)
    probe = params.get("probe")
    if probe:
        t = probe["t"]
        for h in (1e-1, 1e-2, 1e-3):
            if not any(abs(v - h) < 1e-15 for v in t) or not any(abs(v + h) < 1e-15 for v in t):
                raise ConfigError("/probe/t: grid must contain +-0.1, +-0.01, +-0.001")


def parse_config(text: str, suite: str, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Parse JSON text, apply defaults and ``KEY=VALUE`` overrides, validate, hash."""
    if suite not in DEFAULTS:
        raise ConfigError(f"unknown suite {suite!r}; choose from {sorted(DEFAULTS)}")
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("/: config must be a JSON object")
    if data.get("suite", suite) != suite:
        raise ConfigError(f"/suite: config is for {data['suite']!r}, not {suite!r}")
    for item in overrides:
        apply_override(data, item)
    _validate(suite, data)
    data.pop("suite", None)
    params = _merge(DEFAULTS[suite], data)
    _validate(suite, params)
    _check_grids(params)
    return ExperimentConfig(suite, params, config_hash(suite, params))


def apply_override(data: dict, item: str) -> None:
    """Set ``data[key] = value`` from ``"key=value"``; dots address nested keys, value is JSON."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} must have the form KEY=VALUE")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = data
    parts = key.strip().split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {key!r}: {p!r} is not an object")
    node[parts[-1]] = value
