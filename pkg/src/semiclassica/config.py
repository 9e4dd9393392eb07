"""Experiment configuration: JSON validated against a schema, then resolved
into potentials, groups, grids and observables."""
import json

import jsonschema

from .errors import ConfigError
from .grid import GridSpec, default_grid
from .phase_space import (BUILTIN_POTENTIALS, PhasePoint, Potential, builtin_potential,
                          coordinate, gaussian_bump, polynomial_cutoff)
from .symmetry import make_group

COMMANDS = ("ground", "husimi", "classical-limit", "localization", "eig-convergence",
            "semigroup", "axioms", "ssb-report", "check")

_NUM_LIST = {"type": "array", "items": {"type": "number"}}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "potential": {"oneOf": [
            {"enum": list(BUILTIN_POTENTIALS)},
            {"type": "object", "additionalProperties": False, "required": ["name", "n"],
             "properties": {"name": {"type": "string"}, "n": {"enum": [1, 2]},
                            "radial": _NUM_LIST, "monomial": _NUM_LIST,
                            "symmetry": {"enum": ["none", "Z2", "SO2"]}}}]},
        "group": {"enum": ["trivial", "none", "z2", "so2", "Z2", "SO2"]},
        "grid": {"type": "object", "additionalProperties": False,
                 "properties": {"n": {"enum": [1, 2]}, "L": {"type": "number", "exclusiveMinimum": 0},
                                "N": {"type": "integer", "minimum": 8}}},
        "phase_grid": {"type": "object", "additionalProperties": False,
                       "properties": {"q_extent": {"type": "number", "exclusiveMinimum": 0},
                                      "p_extent": {"type": "number", "exclusiveMinimum": 0}}},
        "hbar": {"type": "number", "exclusiveMinimum": 0},
        "hbars": {"type": "array", "minItems": 1,
                  "items": {"type": "number", "exclusiveMinimum": 0}},
        "t": {"type": "number", "exclusiveMinimum": 0},
        "eps": {"type": "number", "minimum": 0},
        "mode": {"enum": ["schrodinger", "berezin-gibbs", "comparison"]},
        "eigenpairs": {"type": "integer", "minimum": 1, "maximum": 32},
        "observables": {"type": "array", "items": {"oneOf": [
            {"type": "object", "additionalProperties": False, "required": ["type", "center", "width"],
             "properties": {"type": {"const": "gaussian-bump"}, "center": _NUM_LIST,
                            "width": {"type": "number", "exclusiveMinimum": 0}}},
            {"type": "object", "additionalProperties": False, "required": ["type", "axis"],
             "properties": {"type": {"const": "coordinate"}, "axis": {"type": "integer", "minimum": 0},
                            "kind": {"enum": ["q", "p"]},
                            "cutoff": {"type": "number", "exclusiveMinimum": 0}}},
            {"type": "object", "additionalProperties": False,
             "required": ["type", "q_powers", "p_powers", "radius"],
             "properties": {"type": {"const": "polynomial-with-cutoff"},
                            "q_powers": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            "p_powers": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            "radius": {"type": "number", "exclusiveMinimum": 0}}}]}},
        "output": {"type": "object", "additionalProperties": False,
                   "properties": {"dir": {"type": "string"}, "svg": {"type": "boolean"},
                                  "binary": {"type": "boolean"}}},
        "seed": {"type": "integer", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
    },
}


def validate(cfg):
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    return cfg


def load(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return validate(cfg)


def resolve_potential(spec, n=None):
    if spec is None:
        spec = "doublewell"
    if isinstance(spec, str):
        try:
            return builtin_potential(spec, n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    try:
        return Potential(spec["name"], spec["n"], spec.get("radial"), spec.get("monomial"),
                         spec.get("symmetry"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_group(name, V):
    if name is None:
        return make_group(V.symmetry if V.symmetry != "none" else "trivial", V.n)
    return make_group(name, V.n)


def resolve_grid(spec, n):
    spec = spec or {}
    if spec.get("n", n) != n:
        raise ConfigError(f"grid dimension {spec['n']} does not match the potential ({n})")
    base = default_grid(n)
    try:
        return GridSpec(n, float(spec.get("L", base.L)), int(spec.get("N", base.N)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_observable(spec, n):
    kind = spec["type"]
    if kind == "gaussian-bump":
        c = spec["center"]
        if len(c) != 2 * n:
            raise ConfigError(f"bump centre needs {2 * n} coordinates")
        return gaussian_bump(PhasePoint(tuple(c[:n]), tuple(c[n:])), spec["width"])
    if kind == "coordinate":
        if spec["axis"] >= n:
            raise ConfigError("coordinate axis out of range")
        return coordinate(spec["axis"], spec.get("kind", "q"), n, spec.get("cutoff"))
    if len(spec["q_powers"]) != n or len(spec["p_powers"]) != n:
        raise ConfigError(f"power lists need length {n}")
    return polynomial_cutoff(spec["q_powers"], spec["p_powers"], spec["radius"])
