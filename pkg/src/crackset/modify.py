"""Modification operator, weight update and rectangularization procedures."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid_sets import (Configuration, GridSet, InvalidInput, Rect, is_connected,
                        smallest_enclosing_rectangle)
from .measures import REL, Params, omega_total, star_total, measure_star, rect_star, validate_class


class RectangularizeFailure(RuntimeError):
    pass


def updated_weight(old_w: float, old_diam: float, new_diam: float) -> float:
    if old_w >= 1:
        return 1.0
    if new_diam <= 0:
        return 1.0
    return min(old_diam / new_diam * old_w, 1.0)


def modify(config: Configuration, V: Rect, check_lambda: bool = True) -> Configuration:
    """Carve V out of the configuration and insert its boundary as component 0.

    ``origin`` of the result maps each new index to the old one (None for V).
    """
    spec = config.spec
    if not V.inside(spec):
        raise InvalidInput(f"closure of V={V.as_tuple()} is not inside the ambient square")
    if check_lambda and V.diam() * spec.unit < config.lam * (1 - REL):
        raise InvalidInput("|dV|_inf < lambda")
    vm = V.mask(spec)
    interiors = [GridSet(spec, vm)]
    weights = [1.0]
    rects = [None]
    origin = [None]
    for k, c in enumerate(config.components):
        m = c.interior.mask & ~vm
        if not m.any():
            continue
        X = GridSet(spec, m)
        if m.sum() == c.interior.mask.sum():
            w = c.weight
        else:
            w = updated_weight(c.weight, c.diam_inf(), X.boundary().diam_inf())
        interiors.append(X)
        weights.append(w)
        rects.append(c.rect)
        origin.append(k)
    return Configuration.build(spec, interiors, weights, rects, config.lam, origin=origin)


def engulfed(config: Configuration, V: Rect) -> list[int]:
    """Interior components whose boundary lies in the closed rectangle V."""
    out = []
    for k in config.interior_indices():
        g = config.components[k].gamma
        if g.issubset(g.in_closed_rect(V)):
            out.append(k)
    return out


def estimate_modification(config: Configuration, V: Rect, p: Params) -> dict:
    """Exact change of the weighted measure and the two a priori upper bounds."""
    spec = config.spec
    new = modify(config, V)
    delta = omega_total(new, p) - omega_total(config, p)
    L = engulfed(config, V)
    dV = rect_star(V, spec, p)
    cracks_in_V = 0
    for k in config.interior_indices():
        th = config.components[k].theta
        cracks_in_V += th.in_closed_rect(V).count()
    b1 = dV - (1 - p.h_star) * sum(config.components[k].weight * config.components[k].diam_inf() for k in L) \
        - p.h_star * cracks_in_V * spec.unit
    b2 = dV
    for k in L:
        c = config.components[k]
        b2 -= p.h_star * c.theta.length() + (1 - p.h_star) * c.weight * c.diam_inf()
    return {"delta_omega": delta, "bound_i": b1, "bound_ii": b2, "L_V": L, "config": new}


def _rect_violations(cfg: Configuration, p: Params):
    """Components violating rectangularity (F1) or rectangle connectivity (F2)."""
    spec = cfg.spec
    interior = cfg.interior_indices()
    f1, f2 = [], []
    for k in interior:
        c = cfg.components[k]
        if c.weight >= 1:
            if not c.is_rectangular():
                f1.append(k)
        elif c.rect is not None:
            rm = c.rect.mask(spec)
            for j in interior:
                if not is_connected(rm & ~cfg.components[j].interior.mask, diagonal=True):
                    f2.append(k)
                    break
    return f1, f2


@dataclass
class RectResult:
    config: Configuration
    V: Rect
    choices: list = field(default_factory=list)


def rectangularize(config: Configuration, V: Rect, p: Params, max_steps: int = 10000) -> RectResult:
    """Grow V until modify(config, V') is a valid configuration.

    Violations of rectangularity are absorbed before violations of rectangle
    connectivity; within a class the lowest original index goes first. The
    configuration is always recomputed from the original input.
    """
    spec = config.spec
    cur_V = V
    cur = modify(config, cur_V)
    choices = []
    for _ in range(max_steps):
        f1, f2 = _rect_violations(cur, p)
        if not f1 and not f2:
            return RectResult(cur, cur_V, choices)
        key = lambda k: (cur.origin[k] if cur.origin[k] is not None else -1)
        if f1:
            k = min(f1, key=key)
            comp = cur.components[k]
            new_V = smallest_enclosing_rectangle([cur_V, comp.gamma])
            choices.append(("F1", cur.origin[k]))
        else:
            k = min(f2, key=key)
            comp = cur.components[k]
            new_V = smallest_enclosing_rectangle([cur_V, comp.rect])
            choices.append(("F2", cur.origin[k]))
        if not new_V.inside(spec):
            raise RectangularizeFailure(f"growth escapes the ambient square at {new_V.as_tuple()}")
        if new_V == cur_V:
            raise RectangularizeFailure("growth stalled")
        cur_V = new_V
        cur = modify(config, cur_V)
    raise RectangularizeFailure("step limit reached")


def _first_violator(cfg: Configuration):
    for k in cfg.interior_indices():
        if not cfg.components[k].is_rectangular():
            return k
    return None


def _edge_meets(a, b) -> bool:
    return bool((a.h & b.h).any() or (a.v & b.v).any())


def combine_touching(config: Configuration, seed: list[int] | None = None) -> Configuration:
    """Merge components whose boundaries share an edge.

    With ``seed`` only components connected (through shared edges) to the seed
    indices are merged, into one component placed at the first seed position.
    Without a seed every touching cluster is merged.
    """
    comps = config.components
    k = len(comps)
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if seed is None:
        for a in range(k):
            for b in range(a + 1, k):
                if _edge_meets(comps[a].gamma, comps[b].gamma):
                    parent[find(b)] = find(a)
    else:
        for b in range(k):
            if b != seed[0] and _edge_meets(comps[seed[0]].gamma, comps[b].gamma):
                parent[find(b)] = find(seed[0])
    groups = {}
    for a in range(k):
        groups.setdefault(find(a), []).append(a)
    if all(len(g) == 1 for g in groups.values()):
        return config
    interiors, weights, rects, origin = [], [], [], []
    for a in range(k):
        g = groups.get(a)
        if g is None:
            continue
        m = np.zeros_like(comps[a].interior.mask)
        for b in g:
            m |= comps[b].interior.mask
        interiors.append(GridSet(config.spec, m))
        weights.append(1.0 if len(g) > 1 else comps[a].weight)
        rects.append(None if len(g) > 1 else comps[a].rect)
        origin.append(a)
    cfg = Configuration.build(config.spec, interiors, weights, rects, config.lam, origin=origin)
    # outer-touching components go last
    order = sorted(range(len(cfg.components)), key=lambda a: cfg.components[a].touches_outer_boundary)
    if order != list(range(len(order))):
        cfg2 = cfg.reordered(order)
        cfg = Configuration(cfg2.spec, cfg2.components, cfg2.lam, tuple(cfg.origin[a] for a in order))
    return cfg


def initial_rectangularization(config: Configuration, p: Params, max_steps: int = 100000) -> Configuration:
    """Replace components by pairwise disjoint rectangles without increasing ||.||_*."""
    cur = config.with_weights([1.0] * len(config.components)).with_rects([None] * len(config.components))
    cur = cur.with_lam(config.lam)
    for _ in range(max_steps):
        k = _first_violator(cur)
        if k is None:
            return cur.with_lam(config.lam)
        g = cur.components[k].gamma
        members = [k] + [j for j in cur.interior_indices()
                         if j != k and _edge_meets(g, cur.components[j].gamma)]
        V = smallest_enclosing_rectangle([cur.components[j].gamma for j in members])
        cur = modify(cur, V, check_lambda=False)
        cur = combine_touching(cur, seed=[0])
        cur = Configuration(cur.spec, cur.components, cur.lam, tuple(range(len(cur.components))))
    raise RuntimeError("initial rectangularization did not terminate")


def final_normalize(config: Configuration, p: Params) -> Configuration:
    """Combine touching components, then rectangularize them."""
    cur = combine_touching(config)
    cur = Configuration(cur.spec, cur.components, cur.lam, tuple(range(len(cur.components))))
    return initial_rectangularization(cur, p)
