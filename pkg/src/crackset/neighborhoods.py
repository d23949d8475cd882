"""Neighborhoods of rectangular components: frames, coverings, projections,
exceptional sets, corner-trimmed frames and bridge sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull

from .grid_sets import (Configuration, GridSet, LatticeSpec, Rect, connected_components,
                        interior_edge_masks, adjacent_edge_masks)
from .measures import Params

THRESH = 19 / 20
# minimum size of a prefix-grown exceptional set, in units of tau^2 / h_star
K_MIN_AREA = 1.0


class Property4Violated(Exception):
    pass


# ---------------------------------------------------------------- scales

def layers(t: float, spec: LatticeSpec) -> int:
    """Number of lattice layers used to rasterize a frame of width t (outward)."""
    return max(1, int(math.ceil(t / spec.unit - 1e-9)))


def tau_bar(diam: float, p: Params, spec: LatticeSpec) -> tuple[float, bool]:
    """Base scale of a component, snapped down to a multiple of s and floored.

    Returns the scale and whether it is below the resolution limit 4s.
    """
    raw = p.upsilon * diam
    snapped = math.floor(raw / spec.s + 1e-9) * spec.s
    tb = max(snapped, p.tau_floor)
    return tb, tb < 4 * spec.s - 1e-12


def tau_hat(diam: float, p: Params, spec: LatticeSpec) -> float:
    tb, _ = tau_bar(diam, p, spec)
    raw = p.q ** 2 * tb / p.h_star
    return math.ceil(raw / spec.s - 1e-9) * spec.s


# ---------------------------------------------------------------- frames

@dataclass
class Neighborhood:
    rect: Rect
    t: float
    k: int
    box: Rect
    region: GridSet
    parts: dict

    @property
    def t_eff(self) -> float:
        return self.k * self.region.spec.unit


def _box_mask(spec: LatticeSpec, r: Rect) -> np.ndarray:
    m = np.zeros((spec.n, spec.n), bool)
    m[max(r.x0, 0):max(min(r.x1, spec.n), 0), max(r.y0, 0):max(min(r.y1, spec.n), 0)] = True
    return m


def neighborhood(spec: LatticeSpec, X: Rect, t: float) -> Neighborhood:
    """Frame of width t around the rectangle X (closure of X removed)."""
    k = layers(t, spec)
    box = X.dilate(k)
    region = _box_mask(spec, box) & ~X.mask(spec)
    ii = np.arange(spec.n)[:, None]
    jj = np.arange(spec.n)[None, :]
    parts = {
        "1-": region & (ii < X.x0),
        "1+": region & (ii >= X.x1),
        "2-": region & (jj < X.y0),
        "2+": region & (jj >= X.y1),
    }
    parts = {key: GridSet(spec, m) for key, m in parts.items()}
    return Neighborhood(X, t, k, box, GridSet(spec, region), parts)


def edges_in(es, mask: np.ndarray) -> int:
    """Number of edges of es lying in the open set formed by mask."""
    hm, vm = interior_edge_masks(mask)
    return int((es.h & hm).sum() + (es.v & vm).sum())


def meets(gamma, mask: np.ndarray) -> bool:
    hm, vm = interior_edge_masks(mask)
    return bool((gamma.h & hm).any() or (gamma.v & vm).any())


def box_inside_hull(config: Configuration, box: Rect) -> bool:
    """Closure of the box lies in the open ambient square and in H(W)."""
    spec = config.spec
    if not box.inside(spec):
        return False
    ring = _box_mask(spec, box.dilate(1))
    return not any(c.touches_outer_boundary and (c.interior.mask & ring).any() for c in config.components)


# ---------------------------------------------------------------- tau choice

@dataclass
class TauChoice:
    tau_bar: float
    tau: float
    big: list
    rule: str
    degenerate: bool
    post_ok: bool


def _big_components(config, gamma_idx, t, thresh, spec):
    X = config.components[gamma_idx].bbox()
    N = neighborhood(spec, X, t).region.mask
    out = []
    for k, c in enumerate(config.components):
        if k == gamma_idx or c.diam_inf() < thresh:
            continue
        if meets(c.gamma, N):
            out.append(k)
    return out


def select_tau(config: Configuration, gamma_idx: int, p: Params) -> TauChoice:
    spec = config.spec
    gamma = config.components[gamma_idx]
    X = gamma.bbox()
    tb, degen = tau_bar(gamma.diam_inf(), p, spec)
    if tb <= 0:
        raise ValueError("scale of the component is zero; set tau_floor")
    big = _big_components(config, gamma_idx, tb, 19 * tb, spec)
    if len(big) > 2:
        raise Property4Violated(f"{len(big)} large components meet the frame")
    near_mask = neighborhood(spec, X, tb / 800).region.mask
    near = [meets(config.components[k].gamma, near_mask) for k in big]

    def post(tau):
        inner = neighborhood(spec, X, tau / 20).region.mask
        outer = neighborhood(spec, X, tau).region.mask
        return all(meets(config.components[k].gamma, inner) or not meets(config.components[k].gamma, outer)
                   for k in big)

    if big and all(near):
        tau, rule = tb / 2, "all-near"
    elif not any(near):
        tau, rule = tb / 800, "none-near"
    else:
        tau, rule = tb / 2, "mixed-half"
        if not post(tau):
            tau, rule = tb / 40, "mixed-fortieth"
    return TauChoice(tb, tau, big, rule, degen, post(tau))


# ---------------------------------------------------------------- projection

def pi_projection(R: Rect, X: Rect, t: float, spec: LatticeSpec) -> float:
    """Projection measure of a rectangle relative to the frame of width t around X."""
    gx = max(0, R.x0 - X.x1, X.x0 - R.x1) * spec.unit
    gy = max(0, R.y0 - X.y1, X.y0 - R.y1) * spec.unit
    return max(0.0, min(R.diam() * spec.unit, t - max(gx, gy)))


def component_rects(config: Configuration, exclude=()) -> list[tuple[int, Rect]]:
    out = []
    for k, c in enumerate(config.components):
        if k in exclude or c.touches_outer_boundary:
            continue
        R = c.rect if (c.weight < 1 and c.rect is not None) else c.bbox()
        out.append((k, R))
    return out


def pi_norm(mask: np.ndarray, rects, X: Rect, t: float, spec: LatticeSpec) -> float:
    tot = 0.0
    for _, R in rects:
        if mask[R.x0:R.x1, R.y0:R.y1].any():
            tot += pi_projection(R, X, t, spec)
    return tot


# ---------------------------------------------------------------- coverings

@dataclass
class Covering:
    X: Rect
    k: int
    squares: list          # fine squares as cell rectangles, in ring order
    sides: list            # side label per fine square
    coarse: list           # (start, end) inclusive fine-square index runs, cyclic
    overlap: list = field(default_factory=list)

    def run_indices(self, start: int, end: int) -> list[int]:
        n = len(self.squares)
        out = [start % n]
        while out[-1] != end % n:
            out.append((out[-1] + 1) % n)
        return out

    def mask_of(self, idx, spec) -> np.ndarray:
        m = np.zeros((spec.n, spec.n), bool)
        for a in idx:
            r = self.squares[a]
            m[max(r.x0, 0):max(r.x1, 0), max(r.y0, 0):max(r.y1, 0)] = True
        return m

    def coarse_mask(self, a: int, spec) -> np.ndarray:
        s, e = self.coarse[a % len(self.coarse)]
        return self.mask_of(self.run_indices(s, e), spec)

    def enlarged_mask(self, a: int, spec) -> np.ndarray:
        m = len(self.coarse)
        out = np.zeros((spec.n, spec.n), bool)
        for l in (-1, 0, 1):
            out |= self.coarse_mask((a + l) % m, spec)
        return out


def _split(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    edges = [lo + round(a * (hi - lo) / parts) for a in range(parts + 1)]
    return [(edges[a], edges[a + 1]) for a in range(parts) if edges[a + 1] > edges[a]]


def covering(spec: LatticeSpec, X: Rect, t: float) -> Covering:
    k = layers(t, spec)
    x0, y0, x1, y1 = X.as_tuple()
    w, h = X.width, X.height
    L = w + 2 * k
    m_strip = max(1, round(L / k))
    bottom = [Rect(a, y0 - k, b, y0) for a, b in _split(x0 - k, x1 + k, m_strip)]
    top = [Rect(a, y1, b, y1 + k) for a, b in _split(x0 - k, x1 + k, m_strip)][::-1]
    if h >= k:
        segs = _split(y0, y1, max(1, math.ceil(h / k)))
        right = [Rect(x1, a, x1 + k, b) for a, b in segs]
        left = [Rect(x0 - k, a, x0, b) for a, b in segs][::-1]
    else:
        right = [Rect(x1, y0 - k, x1 + k, y1 + k)]
        left = [Rect(x0 - k, y0 - k, x0, y1 + k)]
    squares = bottom + right + top + left
    sides = ["2-"] * len(bottom) + ["1+"] * len(right) + ["2+"] * len(top) + ["1-"] * len(left)
    # corner squares: ends of the bottom and top strips
    nb, nr, nt = len(bottom), len(right), len(top)
    corners = [0, nb - 1, nb + nr, nb + nr + nt - 1]
    n = len(squares)
    long_sides = h >= w / 2
    breaks = []
    # bottom strip between its corners, right side from bottom-right to top-right corner, ...
    segments = [(corners[0], corners[1], True), (corners[1], corners[2], long_sides),
                (corners[2], corners[3], True), (corners[3], corners[0] + n, long_sides)]
    for a, b, split in segments:
        steps = b - a
        r = min(7, max(1, steps)) if split else 1
        for q in range(r):
            breaks.append((a + round(q * steps / r)) % n)
    breaks = sorted(set(breaks))
    coarse = [(breaks[q], breaks[(q + 1) % len(breaks)]) for q in range(len(breaks))]
    cov = Covering(X, k, squares, sides, coarse)
    d = X.diam() * spec.unit
    tk = k * spec.unit
    for q in range(len(coarse)):
        a = cov.coarse_mask(q, spec)
        b = cov.coarse_mask(q + 1, spec)
        cov.overlap.append(float((a & b).sum() * spec.unit ** 2 / (tk * d)))
    return cov


# ---------------------------------------------------------------- exceptional sets

@dataclass
class ExceptionalSets:
    tau: float
    t_eff: float
    covering: Covering
    K: list                 # list of fine-square index lists (at most two)
    K_masks: list
    seeds: list
    cases: list
    hat_pieces: list        # (mask, pi) per remainder piece
    coarse_pi: list
    checks: dict


def _cyclic_cover(idxs: list[int], n: int) -> tuple[int, int]:
    """Smallest cyclic arc (start, end) of 0..n-1 containing all idxs."""
    s = sorted(set(idxs))
    if len(s) == 1:
        return s[0], s[0]
    gaps = [((s[(a + 1) % len(s)] - s[a]) % n, a) for a in range(len(s))]
    g, a = max(gaps)
    return s[(a + 1) % len(s)], s[a]


def _clusters(over: list[int], m: int) -> list[int]:
    """Centers c such that every index in over lies within cyclic distance 2 of a center."""
    if not over:
        return []
    over = sorted(over)
    best = None
    for start in over:
        centers = []
        rest = sorted(over, key=lambda a: (a - start) % m)
        while rest:
            c = (rest[0] + 2) % m
            centers.append(c)
            rest = [a for a in rest if min((a - c) % m, (c - a) % m) > 2]
        if best is None or len(centers) < len(best):
            best = centers
    return best


def exceptional_sets(config: Configuration, gamma_idx: int, tau: float, p: Params,
                     big: list | None = None) -> ExceptionalSets:
    spec = config.spec
    gamma = config.components[gamma_idx]
    X = gamma.bbox()
    cov = covering(spec, X, tau)
    nb = neighborhood(spec, X, tau)
    N = nb.region.mask
    t_eff = nb.t_eff
    rects = [(k, R) for k, R in component_rects(config, exclude=(gamma_idx,))
             if N[R.x0:R.x1, R.y0:R.y1].any()]
    m = len(cov.coarse)
    cmasks = [cov.coarse_mask(a, spec) for a in range(m)]
    cpi = [pi_norm(cm, rects, X, t_eff, spec) for cm in cmasks]
    over = [a for a in range(m) if cpi[a] > THRESH * t_eff * (1 + 1e-12)]
    centers = _clusters(over, m)
    if len(centers) > 2:
        raise Property4Violated(f"{len(centers)} separated over-threshold regions")
    K_list, cases = [], []
    nsq = len(cov.squares)
    for c in centers:
        run_start = cov.coarse[(c - 2) % m][0]
        run_end = cov.coarse[(c + 2) % m][1]
        S_idx = cov.run_indices(run_start, run_end) if m > 4 else list(range(nsq))
        S_mask = cov.mask_of(S_idx, spec)
        heavy = [(k, R) for k, R in rects if S_mask[R.x0:R.x1, R.y0:R.y1].any()
                 and pi_projection(R, X, t_eff, spec) >= THRESH * t_eff * (1 - 1e-12)]
        if heavy:
            hit = []
            for _, R in heavy:
                Rm = R.mask(spec) & N
                for a in range(nsq):
                    if (cov.mask_of([a], spec) & Rm).any():
                        hit.append(a)
            s, e = _cyclic_cover(hit, nsq)
            K = cov.run_indices(s, e)
            cases.append("a")
        else:
            prefix = np.zeros((spec.n, spec.n), bool)
            kidx = 0
            while kidx < len(S_idx):
                trial = prefix | cov.mask_of([S_idx[kidx]], spec)
                if pi_norm(trial, rects, X, t_eff, spec) > THRESH * t_eff:
                    break
                prefix = trial
                kidx += 1
            kidx = min(kidx, len(S_idx) - 1)
            K = [S_idx[kidx]]
            min_area = K_MIN_AREA * tau ** 2 / p.h_star
            while True:
                rest = [a for a in S_idx[S_idx.index(K[-1]) + 1:]]
                rest_mask = cov.mask_of(rest, spec)
                area = cov.mask_of(K, spec).sum() * spec.unit ** 2
                if not rest or (pi_norm(rest_mask, rects, X, t_eff, spec) <= THRESH * t_eff and area >= min_area):
                    break
                K.append(rest[0])
            cases.append("b")
        # two seeds reaching the same squares describe one exceptional set
        hit = [q for q, K0 in enumerate(K_list) if set(K0) & set(K)]
        if hit:
            q = hit[0]
            s0, e0 = _cyclic_cover(K_list[q] + K, nsq)
            K_list[q] = cov.run_indices(s0, e0)
            cases.pop()
            continue
        K_list.append(K)
    K_masks = [cov.mask_of(K, spec) & N for K in K_list]
    Kall = np.zeros((spec.n, spec.n), bool)
    for km in K_masks:
        Kall |= km
    pieces = []
    for a in range(m):
        rem = GridSet(spec, cmasks[a] & ~Kall & N)
        for piece in connected_components(rem):
            pieces.append((piece.mask, pi_norm(piece.mask, rects, X, t_eff, spec)))
    checks = {}
    checks["hat_pi"] = all(v <= THRESH * t_eff * (1 + 1e-12) for _, v in pieces)
    big = [] if big is None else big
    cover_ok = True
    for b in big:
        g = config.components[b].gamma
        hm, vm = interior_edge_masks(N)
        kh, kv = adjacent_edge_masks(Kall)
        if ((g.h & hm & ~kh).any() or (g.v & vm & ~kv).any()):
            cover_ok = False
    checks["big_covered"] = cover_ok
    sizes = [float(km.sum() * spec.unit ** 2 / (tau ** 2 / p.h_star)) for km in K_masks]
    checks["size_ratio"] = sizes
    checks["size_ok"] = all(s <= p.C_K for s in sizes)
    if len(K_masks) == 2 and all(km.any() for km in K_masks):
        d = _mask_distance(K_masks[0], K_masks[1]) * spec.unit
        checks["dist_ratio"] = float(d / gamma.diam_inf())
        checks["dist_ok"] = d >= p.c_dist * gamma.diam_inf()
    parts = nb.parts
    checks["K_in_one_part"] = [any(km.any() and not (km & ~parts[s].mask).any() for s in parts) for km in K_masks]
    if not checks["hat_pi"] or not checks["big_covered"]:
        raise Property4Violated("exceptional set construction could not meet its bounds")
    return ExceptionalSets(tau, t_eff, cov, K_list, K_masks, centers, cases, pieces, cpi, checks)


def _mask_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance (lattice units) between the closures of two cell sets."""
    pa = np.argwhere(a)
    pb = np.argwhere(b)
    if not len(pa) or not len(pb):
        return math.inf
    best = math.inf
    for chunk in np.array_split(pa, max(1, len(pa) // 512 + 1)):
        d = np.abs(chunk[:, None, :] - pb[None, :, :]) - 1
        d = np.maximum(d, 0)
        best = min(best, float(np.sqrt((d ** 2).sum(-1)).min()))
    return best


# ---------------------------------------------------------------- corner-trimmed frames

@dataclass
class Dodecagon:
    M_hat: GridSet
    M: GridSet
    M1: GridSet
    M2: GridSet
    shape: str


def dodecagonal(spec: LatticeSpec, X: Rect, t: float, p: Params) -> Dodecagon:
    nb = neighborhood(spec, X, t)
    N = nb.region.mask
    tu = t / spec.unit
    margin = p.q * tu / p.h_star
    parts = nb.parts
    if margin < 0.5:
        # the trimmed corners are thinner than half a cell: nothing to remove
        full = GridSet(spec, N)
        return Dodecagon(full, full, GridSet(spec, N & (parts["1-"].mask | parts["1+"].mask)),
                         GridSet(spec, N & (parts["2-"].mask | parts["2+"].mask)), "frame")
    cx = (X.x0 + X.x1) / 2
    cy = (X.y0 + X.y1) / 2
    l1 = X.width / 2
    l2 = X.height / 2
    lo_x = np.arange(spec.n) - cx
    hi_x = lo_x + 1
    # whole cell inside the strip |x_i -/+ l_i| >= margin on the inner side
    okx = (lo_x >= -l1 + margin) & (hi_x <= l1 - margin)
    lo_y = np.arange(spec.n) - cy
    hi_y = lo_y + 1
    oky = (lo_y >= -l2 + margin) & (hi_y <= l2 - margin)
    M_hat = N & (okx[:, None] | oky[None, :])
    lt = l1 + min(tu, p.h_star * l2 / p.q)
    pts = [(X.x0, X.y0), (X.x1, X.y0), (X.x0, X.y1), (X.x1, X.y1), (cx - lt, cy), (cx + lt, cy)]
    ij = np.argwhere(M_hat)
    for i, j in ij:
        pts += [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)]
    pts = np.array(pts, dtype=float)
    hull = ConvexHull(pts)
    eq = hull.equations
    gi, gj = np.meshgrid(np.arange(spec.n + 1), np.arange(spec.n + 1), indexing="ij")
    V = np.stack([gi.ravel(), gj.ravel()], 1).astype(float)
    inside = (V @ eq[:, :2].T + eq[:, 2] <= 1e-9).all(1).reshape(spec.n + 1, spec.n + 1)
    cell_in = inside[:-1, :-1] & inside[1:, :-1] & inside[:-1, 1:] & inside[1:, 1:]
    M = (cell_in & N) | M_hat
    M1 = M & (parts["1-"].mask | parts["1+"].mask)
    M2 = M & (parts["2-"].mask | parts["2+"].mask)
    shape = "dodecagon" if (l2 > margin and l1 > margin) else "decagon"
    return Dodecagon(GridSet(spec, M_hat), GridSet(spec, M), GridSet(spec, M1), GridSet(spec, M2), shape)


# ---------------------------------------------------------------- bridge sets

@dataclass
class PsiRecord:
    Psi: GridSet
    psi: float
    psi_hat: float
    Phi: GridSet
    case_tag: str
    m: int
    side: str
    K_mask: np.ndarray
    checks: dict


def _side_of(Km: np.ndarray, parts: dict) -> tuple[str, bool]:
    for s in ("1-", "1+", "2-", "2+"):
        if not (Km & ~parts[s].mask).any():
            return s, True
    counts = {s: int((Km & parts[s].mask).sum()) for s in parts}
    return max(counts, key=counts.get), False


def disk_dilate(mask: np.ndarray, radius_units: float) -> np.ndarray:
    """Cells whose closure lies within Euclidean distance radius of the closure of mask."""
    R = int(math.floor(radius_units)) + 1
    d = np.arange(-R, R + 1)
    dd = np.maximum(np.abs(d) - 1, 0)
    st = (dd[:, None] ** 2 + dd[None, :] ** 2) <= radius_units ** 2 + 1e-9
    return ndimage.binary_dilation(mask, structure=st)


def psi_sets(config: Configuration, gamma_idx: int, exc: ExceptionalSets, which: int, p: Params) -> PsiRecord | None:
    """Bridge set between the component and a large neighbour meeting the exceptional set."""
    spec = config.spec
    gamma = config.components[gamma_idx]
    X = gamma.bbox()
    cov = exc.covering
    Kidx = exc.K[which]
    Km = exc.K_masks[which]
    tb, _ = tau_bar(gamma.diam_inf(), p, spec)
    tau = exc.tau
    thresh = p.q ** 2 * tb / p.h_star
    cands = [k for k, c in enumerate(config.components)
             if k != gamma_idx and not c.touches_outer_boundary and c.diam_inf() >= thresh * (1 - 1e-12)
             and c.gamma.touching(Km)]
    if not cands:
        return None
    m = max(cands, key=lambda k: (config.components[k].diam_inf(), -k))
    cm = config.components[m]
    Xm = cm.interior.mask
    nb = neighborhood(spec, X, tau)
    side, one_part = _side_of(Km, nb.parts)
    dod = dodecagonal(spec, X, tau, p)
    nsq = len(cov.squares)
    q1 = (Kidx[0] - 1) % nsq
    q2 = (Kidx[-1] + 1) % nsq
    window = cov.mask_of([q1] + list(Kidx) + [q2], spec) & nb.region.mask
    Psi_hat = window & ~Xm
    # extent of the side of X along which K lies
    if side in ("1-", "1+"):
        half_side = X.height / 2 * spec.unit
        opposite = ("2-", "2+")
    else:
        half_side = X.width / 2 * spec.unit
        opposite = ("1-", "1+")
    if (Km & dod.M_hat.mask).any():
        tag = "I"
        Psi = Psi_hat
    else:
        spans_both = all((Km & nb.parts[o].mask).any() for o in opposite)
        thin = half_side <= p.C_prime * tau / p.h_star
        M_g = dodecagonal(spec, X, 21 * tb, p).M.mask
        if thin and spans_both:
            tag = "II_ii"
            Psi = Psi_hat & ~M_g
        else:
            tag = "II_i"
            tbm, _ = tau_bar(cm.diam_inf(), p, spec)
            M_m = dodecagonal(spec, cm.bbox(), 21 * tbm, p).M.mask
            Psi = Psi_hat & ~(M_g | M_m)
    psi, psi_hat = _gap(X, Xm & window, side, spec)
    if tag == "II_ii":
        psi_hat = 2 * half_side
    Phi = disk_dilate(Psi, 20 * tb / spec.unit) if Psi.any() else np.zeros_like(Psi)
    checks = {"K_in_one_part": one_part}
    checks["lipschitz"] = psi_hat <= 16 * psi / p.h_star * (1 + 1e-12)
    checks["psi_hat_ratio"] = float(psi_hat * p.h_star / (16 * psi)) if psi > 0 else (0.0 if psi_hat == 0 else math.inf)
    V = Rect(min(X.x0, cm.bbox().x0), min(X.y0, cm.bbox().y0), max(X.x1, cm.bbox().x1), max(X.y1, cm.bbox().y1))
    if tag == "I":
        checks["Phi_in_V"] = not (Phi & ~V.mask(spec)).any()
    else:
        M_m = dodecagonal(spec, cm.bbox(), 21 * tau_bar(cm.diam_inf(), p, spec)[0], p).M.mask
        half = _half_plane(X, side, psi / spec.unit, spec)
        checks["Phi_in_V"] = not (Phi & half & M_m & ~V.mask(spec)).any()
    return PsiRecord(GridSet(spec, Psi), psi, psi_hat, GridSet(spec, Phi), tag, m, side, Km, checks)


def _gap(X: Rect, Xm_w: np.ndarray, side: str, spec: LatticeSpec) -> tuple[float, float]:
    """Normal gap between X and the neighbour inside the window, and the facing extent."""
    cells = np.argwhere(Xm_w)
    if not len(cells):
        return 0.0, 0.0
    i, j = cells[:, 0], cells[:, 1]
    dx = np.maximum(0, np.maximum(X.x0 - (i + 1), i - X.x1))
    dy = np.maximum(0, np.maximum(X.y0 - (j + 1), j - X.y1))
    gap = int(np.maximum(dx, dy).min())
    if side in ("1-", "1+"):
        facing = np.unique(j[(j >= X.y0) & (j < X.y1)]).size
    else:
        facing = np.unique(i[(i >= X.x0) & (i < X.x1)]).size
    return gap * spec.unit, facing * spec.unit


def _half_plane(X: Rect, side: str, psi_u: float, spec: LatticeSpec) -> np.ndarray:
    ii = np.arange(spec.n)[:, None] + np.zeros((1, spec.n))
    jj = np.arange(spec.n)[None, :] + np.zeros((spec.n, 1))
    if side == "1-":
        return ii >= X.x0 - psi_u
    if side == "1+":
        return ii + 1 <= X.x1 + psi_u
    if side == "2-":
        return jj >= X.y0 - psi_u
    return jj + 1 <= X.y1 + psi_u


# ---------------------------------------------------------------- crack length

def crack_length_check(config: Configuration, gamma_idx: int, t: float, p: Params) -> dict:
    spec = config.spec
    X = config.components[gamma_idx].bbox()
    nb = neighborhood(spec, X, t)
    length = edges_in(config.crack_edges(), nb.region.mask) * spec.unit
    bound = 8 * nb.t_eff / p.h_star
    return {"passes": length <= bound * (1 + 1e-12), "length": length, "bound": bound,
            "V": X.dilate(nb.k)}
