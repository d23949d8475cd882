"""Empirical probing of the Korn-Poincare constant on lattice shapes.

For a jump-free field u on a connected union of lattice squares the probe
measures ||u - Pu||_{L^2} / |Eu|(U), with P the L^2 projection onto
infinitesimal rigid motions. In two dimensions both sides scale the same way,
so the ratio depends on the shape only.
"""
from __future__ import annotations

import math
import warnings

import numpy as np

from .field import field_from_function, fit_rigid_motion, strain_l1
from .grid_sets import InvalidInput, LatticeSpec, is_connected

FAMILIES = ("strip", "square", "lpath")


def strip(k: int) -> list[tuple[int, int]]:
    return [(i, 0) for i in range(k)]


def square(k: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(k) for j in range(k)]


def lpath(k: int) -> list[tuple[int, int]]:
    """Two arms of k squares meeting at a corner square."""
    return [(i, 0) for i in range(k + 1)] + [(0, j) for j in range(1, k + 1)]


SHAPES = {"strip": (strip, range(1, 11)), "square": (square, range(1, 9)), "lpath": (lpath, range(1, 9))}


def shape_mask(cells, n: int = 32, offset: int = 2) -> np.ndarray:
    m = np.zeros((n, n), bool)
    for i, j in cells:
        m[i + offset, j + offset] = True
    return m


def korn_ratio(u, mask: np.ndarray) -> float:
    """||u - Pu||_{L^2(U)} / |Eu|(U); a vanishing strain gives 0 (rigid fields)."""
    den = strain_l1(u, mask)
    fit = fit_rigid_motion(u, mask)
    if den <= 1e-14 * max(math.sqrt(fit["norm_sq"]), 1.0):
        return 0.0
    return math.sqrt(fit["residual"]) / den


def sample_fields(rng, center, samples: int):
    """Axis and random-direction bending fields, random quadratics and one constant strain."""
    cx, cy = center
    out = []
    E = rng.normal(size=(2, 2))
    E = (E + E.T) / 2
    out.append(("constant_strain", lambda x, y, E=E: np.stack([E[0, 0] * (x - cx) + E[0, 1] * (y - cy),
                                                                 E[1, 0] * (x - cx) + E[1, 1] * (y - cy)], -1)))
    angles = [0.0, math.pi / 2] + list(rng.uniform(0, 2 * math.pi, size=samples))
    for th in angles:
        c, s = math.cos(th), math.sin(th)

        def bend(x, y, c=c, s=s):
            # beam bending along direction (c, s), expressed in the original frame
            xl = c * (x - cx) + s * (y - cy)
            yl = -s * (x - cx) + c * (y - cy)
            u1, u2 = -xl * yl, xl * xl / 2
            return np.stack([c * u1 - s * u2, s * u1 + c * u2], -1)
        out.append(("bending", bend))
    for _ in range(samples):
        q = rng.normal(size=(2, 6))

        def quad(x, y, q=q):
            X, Y = x - cx, y - cy
            basis = [np.ones_like(X), X, Y, X * X, X * Y, Y * Y]
            return np.stack([sum(q[0, a] * basis[a] for a in range(6)), sum(q[1, a] * basis[a] for a in range(6))], -1)
        out.append(("quadratic", quad))
    return out


def probe_korn_constant(family: str, samples: int = 4, seed: int = 0, n: int = 32) -> dict:
    """Table of the largest measured ratio per shape of the family."""
    if family not in SHAPES:
        raise InvalidInput(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    spec = LatticeSpec(1.0, 1.0 / n)
    make, sizes = SHAPES[family]
    rng = np.random.default_rng(seed)
    rows = []
    for k in sizes:
        mask = shape_mask(make(k), n)
        if not is_connected(mask):
            raise InvalidInput("probe shapes must be connected")
        cells = np.argwhere(mask)
        center = tuple(spec.to_phys(cells.mean(axis=0) + 0.5))
        best, best_kind = 0.0, None
        for kind, f in sample_fields(rng, center, samples):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)     # single-cell shapes
                r = korn_ratio(field_from_function(spec, f), mask)
            if r > best:
                best, best_kind = r, kind
        size = 4 * int(mask.sum())          # s^-2 |U|
        rows.append({"k": k, "cells": int(mask.sum()), "size": size, "max_ratio": best, "worst_field": best_kind})
    # cubic envelope anchored at the first shape: an upper bound only
    c_env = rows[0]["max_ratio"] / rows[0]["size"] ** 3
    for row in rows:
        row["envelope"] = c_env * row["size"] ** 3
        row["within_envelope"] = row["max_ratio"] <= row["envelope"] * (1 + 1e-9)
    ratios = [row["max_ratio"] for row in rows]
    monotone = all(b >= a * (1 - 1e-9) for a, b in zip(ratios, ratios[1:]))
    return {"family": family, "samples": samples, "seed": seed, "rows": rows, "envelope_constant": c_env,
            "nondecreasing": monotone, "within_envelope": all(r["within_envelope"] for r in rows)}
