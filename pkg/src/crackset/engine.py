"""Iterative modification of a crack configuration with trace certification.

The loop repeatedly picks the smallest eligible component above the current
level, checks the neighbourhood conditions and either certifies it with a
rigid motion (trace step) or modifies the configuration (cases a, b, c).
Every iteration is audited; a failed audit halts the run with an anomaly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field import (DiscreteField, RigidMotion, ZERO_MOTION, elastic_energy, extend,
                    fit_rigid_motion, jump_integral, l2_norm_sq, split_inequality)
from .grid_sets import (Configuration, EdgeSet, GridSet, InvalidInput, Rect, adjacent_edge_masks,
                        interior_edge_masks)
from .measures import REL, Params, component_measures, measure_star, total_measures, validate_class
from .modify import RectangularizeFailure, initial_rectangularization, modify, rectangularize
from .neighborhoods import (Property4Violated, box_inside_hull, crack_length_check, dodecagonal,
                            edges_in, exceptional_sets, layers, neighborhood, psi_sets, select_tau,
                            tau_bar, tau_hat, _mask_distance)

TOL = 1e-9


class Anomaly(RuntimeError):
    """An internal estimate failed; the run stops with a state dump."""

    def __init__(self, kind: str, detail: dict):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


# ---------------------------------------------------------------- B-sets

@dataclass(frozen=True, eq=False)
class BSet:
    """Region whose energy has been spent: closed cells plus the edges it owns."""
    cells: np.ndarray
    edges: EdgeSet

    @classmethod
    def empty(cls, spec):
        return cls(np.zeros((spec.n, spec.n), bool), EdgeSet.empty(spec))

    def minus_edges(self, es: EdgeSet) -> "BSet":
        return BSet(self.cells, self.edges - es)

    def contains_edges(self, es: EdgeSet) -> bool:
        return es.issubset(self.edges)

    def meets_edges(self, es: EdgeSet) -> bool:
        return bool(es & self.edges)

    def __bool__(self):
        return bool(self.cells.any() or self.edges)


def _bset_from(cells: np.ndarray, extra: EdgeSet) -> BSet:
    spec = extra.spec
    hm, vm = interior_edge_masks(cells)
    return BSet(cells.copy(), EdgeSet(spec, hm, vm) | extra)


# ---------------------------------------------------------------- state

@dataclass
class RunState:
    i: int
    lambda_i: float
    config: Configuration
    B_sets: list
    motions: dict
    u_bar: DiscreteField
    log: list = field(default_factory=list)
    skipped: set = field(default_factory=set)

    def omega_hat(self, k: int, p: Params) -> float:
        th = self.config.components[k].theta
        cnt = sum(1 for B in self.B_sets if th and B.contains_edges(th))
        return 1 - (1 - p.omega_min) / 2 * cnt


@dataclass
class Context:
    """Inputs fixed for the whole run."""
    W0: Configuration          # the input configuration W
    u: DiscreteField
    p: Params
    eps: float
    norm_W: float              # ||W||_*
    alpha_W: float             # alpha(W)


def alpha(ctx: Context, cells: np.ndarray) -> float:
    """Elastic energy of the input field on cells that belong to the input W."""
    return elastic_energy(ctx.u, cells & ctx.W0.W().mask)


def _Wmask(cfg: Configuration) -> np.ndarray:
    return cfg.W().mask


def _remap(d: dict, cfg: Configuration) -> dict:
    """Carry a per-component map through a modification using ``origin``."""
    out = {}
    for new, old in enumerate(cfg.origin):
        if old is not None and old in d:
            out[new] = d[old]
    return out


# ---------------------------------------------------------------- eligibility

def hat_layers(diam: float, p: Params, spec) -> tuple[int, float]:
    """Layers of the frame N^{2 tau_hat} and the effective tau_hat they realize."""
    th = tau_hat(diam, p, spec)
    k = layers(2 * th, spec)
    return k, k * spec.unit / 2


def eligible(ctx: Context, cfg: Configuration, k: int) -> bool:
    c = cfg.components[k]
    if c.touches_outer_boundary:
        return False
    R = c.rect if (c.weight < 1 and c.rect is not None) else c.bbox()
    kk, _ = hat_layers(c.diam_inf(), ctx.p, cfg.spec)
    return box_inside_hull(ctx.W0, R.dilate(kk))


# ---------------------------------------------------------------- property4

def _rect_star_grid(w: np.ndarray, h: np.ndarray, unit: float, p: Params) -> np.ndarray:
    return measure_star(2 * (w + h) * unit, np.hypot(w, h) * unit, p)


def _improvement(cfg: Configuration, V: Rect, p: Params, base: float) -> float:
    return total_measures(modify(cfg, V), p)["omega"] - base


def check_property4(state: RunState, gamma: int, p: Params, limit: int | None = None) -> dict:
    """Search rectangles V containing the component for a strict decrease of ||.||_omega.

    Candidates are ranked by a lower bound on the change: |dV|_* minus the
    omega-measure of every component whose bounding box meets the closed V.
    Exact changes are evaluated in that order until the bound exceeds the best
    value found (branch and bound). Returns all strictly improving rectangles
    found, sorted by (change, coordinates).
    """
    cfg = state.config
    spec = cfg.spec
    n = spec.n
    X = cfg.components[gamma].bbox()
    base = total_measures(cfg, p)["omega"]
    x0s = np.arange(1, X.x0 + 1)
    x1s = np.arange(X.x1, n)
    y0s = np.arange(1, X.y0 + 1)
    y1s = np.arange(X.y1, n)
    interior = cfg.interior_indices()
    boxes, wts = [], []
    for k in interior:
        c = cfg.components[k]
        boxes.append(c.gamma.bbox())
        wts.append(component_measures(c, p)["omega"])
    boxes = np.array(boxes).reshape(-1, 4)
    wts = np.array(wts)
    # P[x0, x1, l] = closed x-interval of V meets that of component l
    Px = (x0s[:, None, None] <= boxes[None, None, :, 2]) & (boxes[None, None, :, 0] <= x1s[None, :, None])
    Py = (y0s[:, None, None] <= boxes[None, None, :, 3]) & (boxes[None, None, :, 1] <= y1s[None, :, None])
    A = Px.reshape(-1, len(wts)).astype(float) * wts[None, :]
    removed = A @ Py.reshape(-1, len(wts)).astype(float).T     # (x-pairs, y-pairs)
    w = (x1s[None, :] - x0s[:, None]).reshape(-1)
    h = (y1s[None, :] - y0s[:, None]).reshape(-1)
    star = _rect_star_grid(w[:, None], h[None, :], spec.unit, p)
    lb = star - removed
    nx1, ny1 = len(x1s), len(y1s)
    cand = np.argwhere(lb < -TOL * max(base, 1.0))
    mode = p.property4_mode
    if mode == "sampled" and len(cand) > p.property4_samples:
        rng = np.random.default_rng(p.seed)
        keep = rng.choice(len(cand), p.property4_samples, replace=False)
        cand = cand[np.sort(keep)]
    order = np.lexsort((cand[:, 1], cand[:, 0], lb[cand[:, 0], cand[:, 1]]))
    best = math.inf
    found = []
    evaluated = 0
    for idx in order:
        a, b = cand[idx]
        bound = lb[a, b]
        if bound >= best and found:
            break
        V = Rect(int(x0s[a // nx1]), int(y0s[b // ny1]), int(x1s[a % nx1]), int(y1s[b % ny1]))
        if V == X:
            continue
        d = _improvement(cfg, V, p, base)
        evaluated += 1
        if d < -TOL * max(base, 1.0):
            found.append((d, V.as_tuple(), V))
            best = min(best, d)
        if limit is not None and evaluated >= limit:
            break
    found.sort(key=lambda t: (t[0], t[1]))
    return {"holds": not found, "witness": found[0][2] if found else None,
            "candidates": [(d, V) for d, _, V in found], "evaluated": evaluated,
            "pruned": int(lb.size - evaluated), "mode": mode}


# ---------------------------------------------------------------- property (b)

def check_property_b(state: RunState, gamma: int, p: Params, ctx: Context) -> dict:
    """Energy plus crack length in the frame N^{2 tau_hat} against D eps tau_hat."""
    cfg = state.config
    spec = cfg.spec
    c = cfg.components[gamma]
    X = c.bbox()
    k, th = hat_layers(c.diam_inf(), p, spec)
    if not box_inside_hull(ctx.W0, X.dilate(k)):
        return {"status": "skip", "tau_hat": th}
    N = neighborhood(spec, X, 2 * th).region.mask
    a = alpha(ctx, N & _Wmask(cfg))
    H = edges_in(cfg.crack_edges(), N) * spec.unit
    lhs = a + ctx.eps * H
    rhs = p.D * ctx.eps * th
    if lhs <= rhs * (1 + REL):
        status = "pass"
    elif H > 16 * th / p.h_star:
        status = "fail-surface"
    else:
        status = "fail-elastic"
    return {"status": status, "alpha": a, "H": H, "lhs": lhs, "rhs": rhs, "tau_hat": th, "k": k}


# ---------------------------------------------------------------- property (a)

def check_property_a(state: RunState, gamma: int, psi_records, p: Params, ctx: Context) -> list[dict]:
    cfg = state.config
    spec = cfg.spec
    Wm = _Wmask(cfg)
    out = []
    for rec in psi_records:
        if rec is None:
            out.append({"pass": True, "lhs": 0.0, "rhs": 0.0, "empty": True})
            continue
        Psi = rec.Psi.mask
        a = alpha(ctx, Psi & Wm)
        H = edges_in(cfg.crack_edges(), Psi) * spec.unit
        lhs = a + ctx.eps * H
        rhs = p.D / (1 - p.omega_min) * ctx.eps * rec.psi
        out.append({"pass": lhs <= rhs * (1 + REL), "lhs": lhs, "rhs": rhs, "empty": not Psi.any(),
                    "case": rec.case_tag, "m": rec.m, "psi": rec.psi, "psi_hat": rec.psi_hat})
    return out


# ---------------------------------------------------------------- ledger

def ledger(state: RunState, ctx: Context) -> dict:
    p = ctx.p
    cfg = state.config
    lhs = ctx.eps * total_measures(cfg, p)["omega"] + alpha(ctx, _Wmask(cfg))
    bsum = sum(alpha(ctx, B.cells) for B in state.B_sets)
    rhs = ctx.eps * ctx.norm_W + ctx.alpha_W + p.h_star * (1 - p.omega_min) * bsum
    return {"lhs": lhs, "rhs": rhs, "B_alpha": bsum, "holds": lhs <= rhs * (1 + TOL) + TOL,
            "B_bound": bsum <= 2 * ctx.alpha_W * (1 + TOL) + TOL}


def _energy(cfg: Configuration, ctx: Context) -> float:
    return ctx.eps * total_measures(cfg, ctx.p)["omega"] + alpha(ctx, _Wmask(cfg))


def audit(state: RunState, ctx: Context) -> dict:
    """Per-iteration checks; returns a record of named booleans."""
    p = ctx.p
    cfg = state.config
    spec = cfg.spec
    res = {}
    led = ledger(state, ctx)
    res["energy_ledger"] = led["holds"]
    res["B_alpha_bound"] = led["B_bound"]
    # each cell in at most two B-sets, each cell of W_i in at most one; same for edges
    cnt = np.zeros((spec.n, spec.n), int)
    ch = np.zeros((spec.n, spec.n + 1), int)
    cv = np.zeros((spec.n + 1, spec.n), int)
    for B in state.B_sets:
        cnt += B.cells
        ch += B.edges.h
        cv += B.edges.v
    Wm = _Wmask(cfg)
    cr = cfg.crack_edges()
    res["bsets_overlap"] = bool(cnt.max(initial=0) <= 2 and (cnt[Wm].max(initial=0) <= 1)
                          and ch.max(initial=0) <= 2 and cv.max(initial=0) <= 2
                          and ch[cr.h].max(initial=0) <= 1 and cv[cr.v].max(initial=0) <= 1)
    ok_ii = True
    ok_weights = True
    for k in cfg.interior_indices():
        c = cfg.components[k]
        inside = any(c.theta and B.contains_edges(c.theta) for B in state.B_sets)
        free = c.weight >= 1 and not any(B.meets_edges(c.gamma) for B in state.B_sets)
        if not (inside or free):
            ok_ii = False
        if c.weight < state.omega_hat(k, p) - REL:
            ok_weights = False
    res["bsets_cover"] = ok_ii
    res["omega_hat"] = ok_weights
    res["class"] = validate_class(cfg.with_lam(state.lambda_i), p).ok
    return res


FATAL_AUDITS = ("energy_ledger", "B_alpha_bound", "bsets_overlap", "bsets_cover", "omega_hat", "class")


def property_d(state: RunState, ctx: Context) -> list[dict]:
    """Energy and crack length near traced components stay below D eps tau_hat."""
    p = ctx.p
    cfg = state.config
    spec = cfg.spec
    Wm = _Wmask(cfg)
    cr = cfg.crack_edges()
    out = []
    for k, mot in state.motions.items():
        c = cfg.components[k]
        if c.weight < 1 or any(B.meets_edges(c.gamma) for B in state.B_sets):
            continue
        d = c.diam_inf()
        big = EdgeSet.empty(spec)
        for j, o in enumerate(cfg.components):
            if j != k and o.weight >= 1 and o.diam_inf() > d:
                big = big | o.gamma
        th = tau_hat(d, p, spec)
        N = neighborhood(spec, c.bbox(), th)
        lhs = alpha(ctx, N.region.mask & Wm) + ctx.eps * edges_in(cr - big, N.region.mask) * spec.unit
        rhs = p.D * ctx.eps * N.t_eff
        out.append({"component": k, "lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1 + REL)})
    return out


# ---------------------------------------------------------------- steps

def _fit_near(state: RunState, gamma: int, tau: float, ctx: Context) -> RigidMotion:
    cfg = state.config
    spec = cfg.spec
    X = cfg.components[gamma].bbox()
    Wm = _Wmask(cfg)
    for t in (tau, 2 * tau_hat(cfg.components[gamma].diam_inf(), ctx.p, spec)):
        region = neighborhood(spec, X, t).region.mask & Wm & ctx.W0.W().mask
        if region.sum() >= 2:
            return fit_rigid_motion(state.u_bar, region)["motion"]
    return ZERO_MOTION


def trace_step(state: RunState, gamma: int, p: Params, ctx: Context, tau: float) -> dict:
    cfg = state.config
    c = cfg.components[gamma]
    motion = _fit_near(state, gamma, tau, ctx)
    state.u_bar = extend(state.u_bar, cfg, {gamma: motion}, [gamma])
    state.motions[gamma] = motion
    jump = jump_integral(state.u_bar, c.gamma, 2, check=False)
    scale = ctx.eps / p.upsilon ** 4 * c.diam_inf() ** 2
    budget = (p.C_hat + p.C_star / 2) * scale
    state.lambda_i = max(state.lambda_i, c.diam_inf())
    state.B_sets.append(BSet.empty(cfg.spec))
    return {"motion": motion.to_dict(), "jump": jump, "budget": budget,
            "budget_ratio": jump / budget if budget > 0 else 0.0,
            "C_hat_measured": jump / scale if scale > 0 else 0.0, "passes": jump <= budget}


def _apply_modification(state: RunState, cfg_in: Configuration, V: Rect, ctx: Context,
                        extra_B: BSet | None = None) -> dict:
    """Rectangularize after carving V, trim B-sets by the new boundary and remap motions."""
    p = ctx.p
    res = rectangularize(cfg_in, V, p)
    new = res.config
    dV = res.V.boundary(new.spec)
    Bs = list(state.B_sets) + ([extra_B] if extra_B is not None else [BSet.empty(new.spec)])
    state.B_sets = [B.minus_edges(dV) for B in Bs]
    state.motions = _remap(state.motions, new)
    state.config = new
    return {"V": V.as_tuple(), "V_final": res.V.as_tuple(), "choices": [list(c) for c in res.choices]}


def case_a(state: RunState, gamma: int, candidates, ctx: Context) -> dict:
    cfg = state.config
    before = _energy(cfg, ctx)
    d = cfg.components[gamma].diam_inf()
    last = None
    for delta, V in candidates:
        try:
            info = _apply_modification(state, cfg, V, ctx)
        except RectangularizeFailure as e:
            last = str(e)
            continue
        after = _energy(state.config, ctx)
        info["energy_before"] = before
        info["energy_after"] = after
        if after > before * (1 + TOL) + TOL:
            raise Anomaly("case_a_energy", {"before": before, "after": after, "V": V.as_tuple()})
        state.lambda_i = max(state.lambda_i, d)
        return info
    raise Anomaly("case_a_no_candidate", {"last_error": last, "n_candidates": len(candidates)})


def case_b(state: RunState, gamma: int, pb: dict, ctx: Context) -> dict:
    cfg = state.config
    spec = cfg.spec
    p = ctx.p
    c = cfg.components[gamma]
    X = c.bbox()
    V = X.dilate(pb["k"])
    th = pb["tau_hat"]
    grow = measure_star(V.perimeter() * spec.unit, V.diam() * spec.unit, p) - component_measures(c, p)["star"]
    aV = alpha(ctx, V.mask(spec) & _Wmask(cfg))
    checks = {"grow": grow, "grow_ok": grow <= 16 * th * (1 + REL),
              "ledger": 16 * ctx.eps * th - aV, "ledger_ok": 16 * ctx.eps * th - aV <= 0}
    if not (checks["grow_ok"] and checks["ledger_ok"]):
        raise Anomaly("case_b_ledger", checks)
    info = case_a(state, gamma, [(0.0, V)], ctx)
    info.update(checks)
    return info


def _connector(X: Rect, Xm: np.ndarray) -> tuple[float, tuple]:
    """Perimeter (units) of the rectangle bridging X and the nearest cell of Xm."""
    cells = np.argwhere(Xm)
    i, j = cells[:, 0], cells[:, 1]
    dx = np.maximum(0, np.maximum(X.x0 - (i + 1), i - X.x1))
    dy = np.maximum(0, np.maximum(X.y0 - (j + 1), j - X.y1))
    g = np.maximum(dx, dy)
    a = int(np.lexsort((j, i, dx + dy, g))[0])
    return float(2 * (dx[a] + dy[a])), (int(i[a]), int(j[a]))


def case_c(state: RunState, gamma: int, rec, ctx: Context) -> dict:
    cfg = state.config
    spec = cfg.spec
    p = ctx.p
    c = cfg.components[gamma]
    X = c.bbox()
    m = rec.m
    Psi = rec.Psi.mask
    Wm = _Wmask(cfg)
    tb, _ = tau_bar(c.diam_inf(), p, spec)
    free = {k for k in cfg.interior_indices()
            if cfg.components[k].weight >= 1 and not any(B.meets_edges(cfg.components[k].gamma) for B in state.B_sets)}
    A, Mdod = [], {}
    pah, pav = adjacent_edge_masks(Psi)
    for k in cfg.interior_indices():
        if k in (gamma, m):
            continue
        o = cfg.components[k]
        hit = bool((o.theta.h & pah).any() or (o.theta.v & pav).any())
        if k in free:
            eta = min(21 * tau_bar(o.diam_inf(), p, spec)[0], 21 * p.size_scale(state.lambda_i))
            Mdod[k] = dodecagonal(spec, o.bbox(), eta, p).M.mask
            hit = hit or bool((Mdod[k] & Psi).any())
        if hit:
            A.append(k)
    near_checks = []
    for k in A:
        o = cfg.components[k]
        dist = _mask_distance(o.interior.mask, Psi) * spec.unit if Psi.any() else math.inf
        near_checks.append({"component": k, "small": o.diam_inf() < 19 * tb * (1 + REL), "near": dist <= tb * (1 + REL)})
    if not all(r["small"] and r["near"] for r in near_checks):
        raise Anomaly("case_c_neighbours", {"A": A, "checks": near_checks})
    # B-sets already covering energy near free members of A
    used = [j for j, B in enumerate(state.B_sets)
            if B and any(k in Mdod and not (B.cells & Wm & ~Mdod[k]).any() for k in A)]
    theta_union = EdgeSet.empty(spec)
    for k in A:
        theta_union = theta_union | cfg.components[k].theta
    newB = _bset_from(Psi & Wm, theta_union)
    for j in used:
        B = state.B_sets[j]
        hm, vm = interior_edge_masks(B.cells)
        newB = BSet(newB.cells & ~B.cells, newB.edges - B.edges - EdgeSet(spec, hm, vm))
    A_tilde = [k for k in A if cfg.components[k].theta and newB.contains_edges(cfg.components[k].theta)]
    weights = [o.weight for o in cfg.components]
    rects = [o.rect for o in cfg.components]
    for k in A_tilde:
        weights[k] = weights[k] - (1 - p.omega_min) / 2
        if rects[k] is None:
            rects[k] = cfg.components[k].bbox()
    star = Configuration(spec, cfg.with_weights(weights).with_rects(rects).components, cfg.lam, tuple(range(len(weights))))
    T_perim, _ = _connector(X, cfg.components[m].interior.mask)
    T_perim *= spec.unit
    Xm = cfg.components[m].bbox()
    V = Rect(min(X.x0, Xm.x0), min(X.y0, Xm.y0), max(X.x1, Xm.x1), max(X.y1, Xm.y1))
    before = _energy(cfg, ctx)
    aB = alpha(ctx, newB.cells)
    info = _apply_modification(state, star, V, ctx, extra_B=newB)
    after = _energy(state.config, ctx)
    info.update({"m": m, "A": A, "A_tilde": A_tilde, "B_reused": used, "alpha_B": aB,
                 "T_perimeter": T_perim, "T_ok": T_perim <= 4 * rec.psi * (1 + REL) + REL,
                 "energy_before": before, "energy_after": after, "near_checks": near_checks})
    if after > before + p.h_star * (1 - p.omega_min) * aB + TOL * max(before, 1.0):
        raise Anomaly("case_c_energy", {k: info[k] for k in ("energy_before", "energy_after", "alpha_B")})
    state.lambda_i = max(state.lambda_i, c.diam_inf())
    return info


# ---------------------------------------------------------------- driver

def _select(state: RunState, ctx: Context):
    cfg = state.config
    best = None
    for k in cfg.interior_indices():
        if k in state.motions:
            continue
        c = cfg.components[k]
        d = c.diam_inf()
        if d < state.lambda_i * (1 - REL):
            continue
        if not eligible(ctx, cfg, k):
            continue
        key = (d, c.bbox().as_tuple())
        if best is None or key < best[0]:
            best = (key, k)
    return None if best is None else best[1]


def _iteration(state: RunState, ctx: Context) -> dict | None:
    p = ctx.p
    gamma = _select(state, ctx)
    if gamma is None:
        return None
    cfg = state.config
    c = cfg.components[gamma]
    rec = {"index": state.i, "active_component": gamma, "bbox": list(c.bbox().as_tuple()),
           "diam": c.diam_inf()}
    p4 = check_property4(state, gamma, p)
    rec["property4"] = {"holds": p4["holds"], "evaluated": p4["evaluated"], "mode": p4["mode"]}
    if not p4["holds"]:
        rec["case"] = "a"
        rec["detail"] = case_a(state, gamma, p4["candidates"], ctx)
        return rec
    pb = check_property_b(state, gamma, p, ctx)
    rec["property_b"] = {k: v for k, v in pb.items() if k != "k"}
    if pb["status"] == "fail-surface":
        cl = crack_length_check(cfg, gamma, 2 * pb["tau_hat"], p)
        raise Anomaly("crack_length_with_property4", {"length": cl["length"], "bound": cl["bound"]})
    if pb["status"] in ("pass", "fail-elastic"):
        cl = crack_length_check(cfg, gamma, 2 * pb["tau_hat"], p)
        rec["crack_length"] = {k: v for k, v in cl.items() if k != "V"}
    if pb["status"] == "fail-elastic":
        rec["case"] = "b"
        rec["detail"] = case_b(state, gamma, pb, ctx)
        return rec
    try:
        tc = select_tau(cfg, gamma, p)
        exc = exceptional_sets(cfg, gamma, tc.tau, p, tc.big)
    except Property4Violated as e:
        raise Anomaly("neighborhood_with_property4", {"error": str(e)})
    rec["tau"] = {"tau_bar": tc.tau_bar, "tau": tc.tau, "rule": tc.rule, "post_ok": tc.post_ok,
                  "degenerate": tc.degenerate, "big": list(tc.big)}
    rec["exceptional"] = {"cases": exc.cases, "checks": {k: v for k, v in exc.checks.items()}}
    records = [psi_sets(cfg, gamma, exc, j, p) for j in range(len(exc.K))]
    rec["psi"] = [None if r is None else {"case": r.case_tag, "m": r.m, "psi": r.psi, "psi_hat": r.psi_hat,
                                          "checks": r.checks} for r in records]
    pa = check_property_a(state, gamma, records, p, ctx)
    rec["property_a"] = pa
    for r, res in zip(records, pa):
        if r is not None and not res["pass"]:
            rec["case"] = "c"
            rec["detail"] = case_c(state, gamma, r, ctx)
            return rec
    rec["case"] = "trace"
    rec["detail"] = trace_step(state, gamma, p, ctx, tc.tau)
    return rec


@dataclass
class RunResult:
    U: Configuration
    u_bar: DiscreteField
    motions: dict
    report: dict
    state: RunState


def make_context(config0: Configuration, u: DiscreteField, p: Params, eps: float | None = None) -> Context:
    eps = p.epsilon if eps is None else eps
    return Context(config0, u, p, eps, total_measures(config0, p)["star"], elastic_energy(u, config0.W().mask))


def _measures_rec(cfg, p):
    return {k: float(v) for k, v in total_measures(cfg, p).items()}


def run(config0: Configuration, u: DiscreteField, p: Params, eps: float | None = None,
        max_iter: int | None = None, on_frame=None) -> RunResult:
    """Run the modification loop to completion or to the first anomaly."""
    p.checked()
    ctx = make_context(config0, u, p, eps)
    spec = config0.spec
    W0 = initial_rectangularization(config0.with_lam(0.0), p)
    u_bar = DiscreteField(spec, u.values, u.domain, u.jump_set | W0.crack_edges())
    state = RunState(0, 0.0, W0, [BSet.empty(spec)], {}, u_bar)
    cap = len(config0.components) + spec.n ** 2 + 1 if max_iter is None else max_iter
    iters, anomalies = [], []
    init = {"star_in": ctx.norm_W, "star_out": total_measures(W0, p)["star"],
            "alpha_in": ctx.alpha_W, "alpha_out": alpha(ctx, W0.W().mask)}
    init["ok"] = init["star_out"] <= init["star_in"] * (1 + REL) and init["alpha_out"] <= init["alpha_in"] * (1 + REL)
    if not init["ok"]:
        anomalies.append({"kind": "initial_rectangularization", "detail": init})
    halted = bool(anomalies)
    while not halted:
        if state.i >= cap:
            anomalies.append({"kind": "iteration_cap", "detail": {"cap": cap}})
            break
        try:
            rec = _iteration(state, ctx)
        except Anomaly as e:
            anomalies.append({"kind": e.kind, "detail": _jsonable(e.detail), "iteration": state.i})
            break
        if rec is None:
            break
        state.i += 1
        rec["lambda"] = state.lambda_i
        rec["measures"] = _measures_rec(state.config, p)
        rec["alpha"] = alpha(ctx, _Wmask(state.config))
        led = ledger(state, ctx)
        rec["ledger"] = {"lhs": led["lhs"], "rhs": led["rhs"]}
        au = audit(state, ctx)
        rec["audit"] = au
        pd = property_d(state, ctx)
        rec["property_d"] = all(r["holds"] for r in pd)
        rec["anomalies"] = [k for k in FATAL_AUDITS if not au[k]]
        if rec["case"] != "trace" and not rec["property_d"]:
            rec["anomalies"].append("property_d")
        iters.append(rec)
        if on_frame is not None:
            on_frame(state, rec)
        if rec["anomalies"]:
            anomalies.append({"kind": "audit", "detail": rec["anomalies"], "iteration": rec["index"]})
            break
    final = finalize(state, ctx)
    report = {"initial": init, "iterations": iters, "anomalies": anomalies, "final": final}
    return RunResult(state.config, state.u_bar, dict(state.motions), report, state)


def interior_square(U: Configuration, p: Params) -> tuple[float, Rect | None]:
    """Half side of the square left after shrinking by the rectangle diameters."""
    spec = U.spec
    tot = 0.0
    for k in U.interior_indices():
        c = U.components[k]
        R = c.rect if (c.weight < 1 and c.rect is not None) else c.bbox()
        tot += 3 * R.diam() * spec.unit
    for c in U.components:
        if c.touches_outer_boundary:
            tot += c.diam_inf()
    mu_U = max(spec.mu - tot, 0.0)
    h = int(math.floor(mu_U / spec.unit + 1e-9))
    if h <= 0:
        return mu_U, None
    c0 = spec.half_cells
    return mu_U, Rect(c0 - h, c0 - h, c0 + h, c0 + h)


def finalize(state: RunState, ctx: Context) -> dict:
    p = ctx.p
    U = state.config
    spec = U.spec
    mU, QU = interior_square(U, p)
    missing = []
    if QU is not None:
        qm = QU.mask(spec)
        for k in U.interior_indices():
            c = U.components[k]
            if (c.interior.mask & qm).any() and k not in state.motions:
                missing.append(k)
    for k in missing:
        mot = _fit_near(state, k, tau_bar(U.components[k].diam_inf(), p, spec)[0], ctx)
        state.motions[k] = mot
        state.u_bar = extend(state.u_bar, U, {k: mot}, [k])
    star_U = total_measures(U, p)["star"]
    aU = alpha(ctx, _Wmask(U))
    lhs = ctx.eps * star_U + aU
    rhs = (1 + p.sigma) * (ctx.eps * ctx.norm_W + ctx.alpha_W)
    removed = (ctx.W0.W().mask & ~_Wmask(U)).sum() * spec.unit ** 2
    inf_U = sum(U.components[k].diam_inf() for k in U.interior_indices())
    comps = []
    diam_ok_all = True
    for k in U.interior_indices():
        c = U.components[k]
        R = c.rect if (c.weight < 1 and c.rect is not None) else c.bbox()
        cm = component_measures(c, p)
        ok = R.diam() * spec.unit <= (1 + 2 * max(p.h_star, p.sigma)) * cm["star"] * (1 + REL)
        diam_ok_all &= ok
        rec = {"index": k, "rect": list(R.as_tuple()), "weight": c.weight, "diam": c.diam_inf(),
               "traced": k in state.motions, "diam_ok": ok}
        if k in state.motions:
            jump = jump_integral(state.u_bar, c.theta, 2, check=False)
            rec["trace_jump"] = jump
            scale = ctx.eps / p.upsilon ** 4 * c.diam_inf() ** 2
            rec["trace_jump_ratio"] = jump / scale if scale > 0 else 0.0
            rec["motion"] = state.motions[k].to_dict()
        comps.append(rec)
    rep = validate_class(U.with_lam(state.lambda_i), p)
    return {"lambda": state.lambda_i, "iterations": state.i,
            "energy_balance": {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1 + TOL)},
            "removed_area": {"lhs": float(removed), "rhs": inf_U ** 2, "holds": removed <= inf_U ** 2 * (1 + REL)},
            "diam_vs_star": diam_ok_all, "class_ok": rep.ok, "mu_U": mU,
            "Q_U": None if QU is None else list(QU.as_tuple()), "late_fits": missing,
            "components": comps}


# ---------------------------------------------------------------- pipeline

def theorem_pipeline(config0: Configuration, u: DiscreteField, p: Params, adaptive_eps: bool = False,
                     D_sets=(), envelope_c: float = 4.0, max_iter: int | None = None, on_frame=None) -> dict:
    """Run the loop, then evaluate the surface budget, the Korn-Poincare ratio and diagnostics."""
    spec = config0.spec
    H1 = config0.interior_crack_edges().length()
    aW = elastic_energy(u, config0.W().mask)
    eps = p.epsilon
    if adaptive_eps:
        eps = aW / H1 if H1 > 0 and aW > 0 else p.epsilon
    res = run(config0, u, p, eps=eps, max_iter=max_iter, on_frame=on_frame)
    U = res.U
    rects = []
    for k in U.interior_indices():
        c = U.components[k]
        rects.append(c.rect if (c.weight < 1 and c.rect is not None) else c.bbox())
    sum_diam = sum(R.diam() * spec.unit for R in rects)
    budget_base = H1 + aW / eps
    measured_c = ((sum_diam / budget_base - 1) / p.theta) if budget_base > 0 else 0.0
    surface = {"lhs": sum_diam, "rhs": (1 + envelope_c * p.theta) * budget_base, "theta": p.theta,
               "c_measured": measured_c, "c_envelope": envelope_c,
               "holds": sum_diam <= (1 + envelope_c * p.theta) * budget_base * (1 + REL)}
    E = np.zeros((spec.n, spec.n), bool)
    for R in rects:
        E |= R.mask(spec)
    mu_t = max(spec.mu - 3 * sum_diam, 0.0)
    h = int(math.floor(mu_t / spec.unit + 1e-9))
    korn = {"mu_tilde": mu_t, "vacuous": h <= 0}
    if h > 0:
        c0 = spec.half_cells
        Qt = Rect(c0 - h, c0 - h, c0 + h, c0 + h)
        region = Qt.mask(spec) & ~E
        korn["Q_tilde"] = list(Qt.as_tuple())
        if region.sum() >= 1:
            fit = fit_rigid_motion(u, region)
            lhs = fit["residual"]
            denom = spec.mu ** 2 * (aW + eps * H1)
            korn.update({"lhs": lhs, "rhs": denom, "ratio": lhs / denom if denom > 0 else 0.0,
                         "A": fit["motion"].a, "b": list(fit["motion"].b)})
    cor = []
    for D in D_sets:
        s = split_inequality(res.u_bar, D)
        cor.append({"lhs": s["lhs"], "rhs": s["rhs"], "holds": s["holds"]})
    moments = {"p2": 0.0, "p4": 0.0}
    for k, mot in res.motions.items():
        d = U.components[k].diam_inf()
        moments["p2"] += d ** 2 * mot.frob() ** 2
        moments["p4"] += d ** 2 * mot.frob() ** 4
    res.report["final"].update({"rectangles": [list(R.as_tuple()) for R in rects], "surface_budget": surface,
                                "korn": korn, "split_checks": cor, "motion_moments": moments, "epsilon": eps,
                                "adaptive_eps": adaptive_eps, "H1_J": H1, "alpha_W": aW})
    return {"result": res, "report": res.report}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Rect):
        return list(x.as_tuple())
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x
