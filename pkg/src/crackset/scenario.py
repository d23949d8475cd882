"""Scenario files (YAML) and field snapshots."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import jsonschema
import numpy as np
import yaml

from .field import DiscreteField, generate_field, snapshot_header
from .grid_sets import Configuration, GridSet, InvalidInput, LatticeSpec, Rect, components_of
from .measures import Params


class ScenarioError(InvalidInput):
    pass


_RECT = {"type": "array", "items": {"type": "integer"}, "minItems": 4, "maxItems": 4}

SCHEMA = {
    "type": "object",
    "required": ["lattice", "components", "field"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "lattice": {
            "type": "object", "required": ["mu", "s"], "additionalProperties": False,
            "properties": {"mu": {"type": "number", "exclusiveMinimum": 0},
                           "s": {"type": "number", "exclusiveMinimum": 0}},
        },
        "params": {"type": "object"},
        "components": {
            "type": "array",
            "items": {
                "type": "object", "additionalProperties": False,
                "properties": {"rect": _RECT,
                               "cells": {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                                                    "minItems": 2, "maxItems": 2}}},
                "oneOf": [{"required": ["rect"]}, {"required": ["cells"]}],
            },
        },
        "field": {
            "type": "object", "additionalProperties": False,
            "properties": {"generator": {"enum": ["smooth", "piecewise_rigid", "noise"]},
                           "seed": {"type": "integer"},
                           "amplitude": {"type": "number"},
                           "target_alpha": {"type": ["number", "null"]},
                           "snapshot": {"type": "string"}},
            "oneOf": [{"required": ["generator"]}, {"required": ["snapshot"]}],
        },
        "run": {
            "type": "object", "additionalProperties": False,
            "properties": {"adaptive_eps": {"type": "boolean"},
                           "max_iter": {"type": "integer", "minimum": 0},
                           "D_sets": {"type": "array", "items": _RECT}},
        },
        "expect": {"type": "object"},
    },
}


@dataclass
class Scenario:
    name: str
    spec: LatticeSpec
    params: Params
    config0: Configuration
    field_spec: dict
    run_opts: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)
    path: str | None = None

    def make_field(self) -> DiscreteField:
        fs = self.field_spec
        if "snapshot" in fs:
            path = fs["snapshot"]
            if self.path and not os.path.isabs(path):
                path = os.path.join(os.path.dirname(self.path), path)
            u = read_snapshot(path, self.spec)
            return DiscreteField(self.spec, u.values, self.config0.W(), self.config0.crack_edges())
        return generate_field(self.config0, fs["generator"], seed=fs.get("seed", 0),
                              amplitude=fs.get("amplitude", 1.0), target_alpha=fs.get("target_alpha"))

    def D_sets(self) -> list[Rect]:
        return [Rect(*r) for r in self.run_opts.get("D_sets", [])]


def _path_of(err) -> str:
    return "/".join(str(x) for x in err.absolute_path) or "<root>"


def parse_scenario(data: dict, name: str = "scenario", path: str | None = None) -> Scenario:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioError(f"schema error at {_path_of(e)}: {e.message}") from None
    lat = data["lattice"]
    spec = LatticeSpec(float(lat["mu"]), float(lat["s"]))
    try:
        params = Params.from_dict(data.get("params", {})).checked()
    except (TypeError, InvalidInput) as e:
        raise ScenarioError(f"params: {e}") from None
    groups = []
    removed = np.zeros((spec.n, spec.n), bool)
    for idx, comp in enumerate(data["components"]):
        if "rect" in comp:
            R = Rect(*comp["rect"])
            if not R.within(spec):
                raise ScenarioError(f"components/{idx}/rect: outside the lattice")
            g = R.gridset(spec)
        else:
            cells = [tuple(c) for c in comp["cells"]]
            if any(not (0 <= i < spec.n and 0 <= j < spec.n) for i, j in cells):
                raise ScenarioError(f"components/{idx}/cells: outside the lattice")
            g = GridSet.from_cells(spec, cells)
        if (removed & g.mask).any():
            raise ScenarioError(f"components/{idx}: overlaps an earlier component")
        removed |= g.mask
        groups.append(g)
    config0 = components_of(GridSet(spec, removed), spec, groups)
    return Scenario(data.get("name", name), spec, params, config0, dict(data["field"]),
                    dict(data.get("run", {})), dict(data.get("expect", {})), path)


def load_scenario(path: str) -> Scenario:
    if not os.path.exists(path):
        raise ScenarioError(f"no such scenario: {path}")
    with open(path) as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ScenarioError(f"YAML error: {e}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping")
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_scenario(data, name, path)


# ---------------------------------------------------------------- snapshots

def write_snapshot(u: DiscreteField, path: str) -> None:
    """One JSON header line, then the corner values as little-endian float64, row-major."""
    with open(path, "wb") as f:
        f.write(json.dumps(snapshot_header(u), sort_keys=True).encode() + b"\n")
        f.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_snapshot(path: str, spec: LatticeSpec | None = None) -> DiscreteField:
    with open(path, "rb") as f:
        header = json.loads(f.readline())
        raw = f.read()
    if header.get("format") != "crackset-field":
        raise ScenarioError("not a field snapshot")
    sp = LatticeSpec(header["mu"], header["s"])
    if spec is not None and (sp.n != spec.n or abs(sp.mu - spec.mu) > 1e-12):
        raise ScenarioError("snapshot lattice does not match the scenario")
    vals = np.frombuffer(raw, dtype="<f8").reshape(header["shape"])
    return DiscreteField(sp, vals)
