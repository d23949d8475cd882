"""RunReport assembly and deterministic JSON output."""
from __future__ import annotations

import json
import math

import numpy as np

from . import __version__
from .engine import theorem_pipeline
from .grid_sets import Rect
from .measures import Params

ITER_KEYS = ("index", "active_component", "case", "lambda", "measures", "alpha", "ledger", "anomalies")


def clean(x):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, Rect):
        return list(x.as_tuple())
    if isinstance(x, np.ndarray):
        return clean(x.tolist())
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def build_report(name: str, p: Params, raw: dict, field_spec: dict) -> dict:
    iters = []
    for it in raw["iterations"]:
        rec = {k: it.get(k) for k in ITER_KEYS}
        rec["detail"] = {k: v for k, v in it.items() if k not in ITER_KEYS}
        iters.append(rec)
    fin = raw["final"]
    final = dict(fin)
    for key, default in (("rectangles", []), ("surface_budget", {}), ("korn", {}),
                         ("split_checks", []), ("motion_moments", {})):
        final.setdefault(key, default)
    return clean({
        "meta": {"version": __version__, "seed": p.seed, "scenario": name,
                 "field": field_spec, "property4_mode": p.property4_mode},
        "params": p.to_dict(),
        "initial": raw["initial"],
        "iterations": iters,
        "anomalies": raw["anomalies"],
        "final": final,
    })


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def run_scenario(sc, adaptive_eps: bool | None = None, on_frame=None, u=None):
    """Run the full pipeline on a loaded scenario; returns (report, RunResult)."""
    u = sc.make_field() if u is None else u
    ae = bool(sc.run_opts.get("adaptive_eps", False)) if adaptive_eps is None else adaptive_eps
    out = theorem_pipeline(sc.config0, u, sc.params, adaptive_eps=ae, D_sets=sc.D_sets(),
                           max_iter=sc.run_opts.get("max_iter"), on_frame=on_frame)
    return build_report(sc.name, sc.params, out["report"], sc.field_spec), out["result"]
