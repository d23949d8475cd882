"""Piecewise bilinear displacement fields with jumps across crack edges.

Each cell stores its four corner values (order: (i,j), (i+1,j), (i,j+1),
(i+1,j+1)) for both displacement components, so the two traces on a crack
edge are independent. All integrals of polynomial integrands use 2x2 Gauss
quadrature per cell, which is exact for the degrees involved.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid_sets import (Configuration, EdgeSet, GridSet, InvalidInput, LatticeSpec, Rect,
                        connected_components, interior_edge_masks)

_G = np.array([0.5 - 0.5 / math.sqrt(3), 0.5 + 0.5 / math.sqrt(3)])
# shape functions at the 4 Gauss points, shape (4 points, 4 corners)
_GP = np.array([(x, y) for x in _G for y in _G])


def _shape(xi, eta):
    return np.stack([(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta], -1)


_PHI = _shape(_GP[:, 0], _GP[:, 1])


@dataclass(frozen=True)
class RigidMotion:
    a: float
    b: tuple

    @property
    def A(self) -> np.ndarray:
        return np.array([[0.0, self.a], [-self.a, 0.0]])

    def __call__(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        return np.stack([self.a * y + self.b[0], -self.a * x + self.b[1]], -1)

    def frob(self) -> float:
        return math.sqrt(2) * abs(self.a)

    def to_dict(self):
        return {"a": float(self.a), "b": [float(self.b[0]), float(self.b[1])]}


ZERO_MOTION = RigidMotion(0.0, (0.0, 0.0))


class DiscreteField:
    __slots__ = ("spec", "values", "domain", "jump_set")

    def __init__(self, spec: LatticeSpec, values: np.ndarray, domain: GridSet | None = None,
                 jump_set: EdgeSet | None = None):
        v = np.array(values, dtype=float, copy=True)
        if v.shape != (spec.n, spec.n, 4, 2):
            raise InvalidInput(f"values shape {v.shape} != {(spec.n, spec.n, 4, 2)}")
        if not np.isfinite(v).all():
            raise InvalidInput("non-finite field values")
        v.setflags(write=False)
        self.spec = spec
        self.values = v
        self.domain = GridSet.full(spec) if domain is None else domain
        self.jump_set = EdgeSet.empty(spec) if jump_set is None else jump_set

    def with_values(self, values, jump_set=None, domain=None):
        return DiscreteField(self.spec, values, self.domain if domain is None else domain,
                             self.jump_set if jump_set is None else jump_set)

    # ------------------------------------------------------------ geometry
    def corner_coords(self):
        spec = self.spec
        xs = spec.to_phys(np.arange(spec.n + 1))
        X = np.empty((spec.n, spec.n, 4))
        Y = np.empty((spec.n, spec.n, 4))
        for c, (di, dj) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
            X[:, :, c] = xs[di:spec.n + di][:, None]
            Y[:, :, c] = xs[dj:spec.n + dj][None, :]
        return X, Y

    def gauss_points(self):
        """Physical coordinates of the Gauss points, shape (n, n, 4)."""
        spec = self.spec
        x0 = spec.to_phys(np.arange(spec.n))
        h = spec.unit
        gx = x0[:, None, None] + h * _GP[None, None, :, 0]
        gy = x0[None, :, None] + h * _GP[None, None, :, 1]
        return np.broadcast_to(gx, (spec.n, spec.n, 4)), np.broadcast_to(gy, (spec.n, spec.n, 4))

    # ------------------------------------------------------------ pointwise
    def values_at_gauss(self) -> np.ndarray:
        """u at Gauss points, shape (n, n, 4, 2)."""
        return np.einsum("pc,ijck->ijpk", _PHI, self.values)

    def strain_at_gauss(self) -> np.ndarray:
        """Symmetric gradient at Gauss points, shape (n, n, 4, 2, 2)."""
        u = self.values
        h = self.spec.unit
        xi = _GP[:, 0][None, None, :, None]
        eta = _GP[:, 1][None, None, :, None]
        u0, u1, u2, u3 = (u[:, :, c, None, :] for c in range(4))
        dx = ((1 - eta) * (u1 - u0) + eta * (u3 - u2)) / h
        dy = ((1 - xi) * (u2 - u0) + xi * (u3 - u1)) / h
        G = np.stack([dx, dy], -1)  # G[..., k, l] = d u_k / d x_l
        return 0.5 * (G + np.swapaxes(G, -1, -2))

    def continuity_defect(self) -> float:
        """Largest corner mismatch across edges that are not crack edges."""
        v = self.values
        hm, vm = interior_edge_masks(np.ones((self.spec.n, self.spec.n), bool))
        err = 0.0
        # horizontal edges h[i, j], 1 <= j <= n-1: lower cell (i, j-1) corners 2,3; upper (i, j) corners 0,1
        jumpable = self.jump_set.h[:, 1:-1]
        d = np.abs(v[:, :-1, 2:4] - v[:, 1:, 0:2]).max(axis=(2, 3))
        if (~jumpable).any():
            err = max(err, float(d[~jumpable].max()))
        jumpable = self.jump_set.v[1:-1, :]
        d = np.abs(v[:-1, :, [1, 3]] - v[1:, :, [0, 2]]).max(axis=(2, 3))
        if (~jumpable).any():
            err = max(err, float(d[~jumpable].max()))
        return err


def _mask_of(U, spec) -> np.ndarray:
    if U is None:
        return np.ones((spec.n, spec.n), bool)
    if isinstance(U, GridSet):
        return U.mask
    if isinstance(U, Rect):
        return U.mask(spec)
    return np.asarray(U, bool)


def elastic_energy(u: DiscreteField, U=None) -> float:
    """Integral of |e(u)|^2 over the cells of U (default: the domain)."""
    m = u.domain.mask if U is None else _mask_of(U, u.spec)
    e = u.strain_at_gauss()[m]
    return float((e ** 2).sum() * u.spec.unit ** 2 / 4)


def strain_l1(u: DiscreteField, U=None) -> float:
    """Integral of |e(u)| over U, with the same per-cell quadrature."""
    m = u.domain.mask if U is None else _mask_of(U, u.spec)
    e = u.strain_at_gauss()[m]
    return float(np.sqrt((e ** 2).sum(axis=(-1, -2))).sum() * u.spec.unit ** 2 / 4)


def l2_norm_sq(u: DiscreteField, U=None) -> float:
    m = _mask_of(U, u.spec)
    g = u.values_at_gauss()[m]
    return float((g ** 2).sum() * u.spec.unit ** 2 / 4)


# ---------------------------------------------------------------- traces and jumps

def edge_traces(u: DiscreteField, es: EdgeSet):
    """Endpoint traces on both sides of every edge in es.

    Returns (minus_start, minus_end, plus_start, plus_end, interior_flag) with
    arrays of shape (k, 2); 'minus' is the lower/left cell, 'plus' the
    upper/right cell. Edges on the outer boundary have interior_flag False and
    only their single-sided trace is meaningful (copied to both sides).
    """
    n = u.spec.n
    v = u.values
    out = [[], [], [], [], []]
    hi = np.argwhere(es.h)
    if len(hi):
        i, j = hi[:, 0], hi[:, 1]
        lo = np.clip(j - 1, 0, n - 1)
        up = np.clip(j, 0, n - 1)
        ms, me = v[i, lo, 2], v[i, lo, 3]
        ps, pe = v[i, up, 0], v[i, up, 1]
        inner = (j >= 1) & (j <= n - 1)
        ms = np.where((j == 0)[:, None], ps, ms)
        me = np.where((j == 0)[:, None], pe, me)
        ps = np.where((j == n)[:, None], ms, ps)
        pe = np.where((j == n)[:, None], me, pe)
        for lst, a in zip(out, (ms, me, ps, pe, inner)):
            lst.append(a)
    vi = np.argwhere(es.v)
    if len(vi):
        i, j = vi[:, 0], vi[:, 1]
        lf = np.clip(i - 1, 0, n - 1)
        rt = np.clip(i, 0, n - 1)
        ms, me = v[lf, j, 1], v[lf, j, 3]
        ps, pe = v[rt, j, 0], v[rt, j, 2]
        inner = (i >= 1) & (i <= n - 1)
        ms = np.where((i == 0)[:, None], ps, ms)
        me = np.where((i == 0)[:, None], pe, me)
        ps = np.where((i == n)[:, None], ms, ps)
        pe = np.where((i == n)[:, None], me, pe)
        for lst, a in zip(out, (ms, me, ps, pe, inner)):
            lst.append(a)
    if not out[0]:
        z = np.zeros((0, 2))
        return z, z, z, z, np.zeros(0, bool)
    return tuple(np.concatenate(lst) for lst in out)


def _int_sq_linear(a: np.ndarray, b: np.ndarray, L: float) -> np.ndarray:
    """Integral over [0, L] of |a + (b - a) s / L|^2 for vector endpoints a, b."""
    return L * ((a * a).sum(-1) + (a * b).sum(-1) + (b * b).sum(-1)) / 3


def _int_abs_linear(a: np.ndarray, b: np.ndarray, L: float) -> np.ndarray:
    """Integral over [0, L] of |a + (b - a) s / L| (closed form)."""
    d = b - a
    A = (d * d).sum(-1)
    B = 2 * (a * d).sum(-1)
    C = (a * a).sum(-1)
    out = np.sqrt(C).astype(float)  # A == 0: constant integrand
    nz = A > 1e-300
    if nz.any():
        A_, B_, C_ = A[nz], B[nz], C[nz]
        beta = B_ / (2 * A_)
        kappa = np.maximum(C_ / A_ - beta ** 2, 0.0)

        def F(z):
            r = np.sqrt(z * z + kappa)
            with np.errstate(divide="ignore", invalid="ignore"):
                lg = np.where(kappa > 0, kappa * np.arcsinh(z / np.sqrt(np.where(kappa > 0, kappa, 1.0))), 0.0)
            return 0.5 * (z * r + lg)

        out[nz] = np.sqrt(A_) * (F(1 + beta) - F(beta))
    return L * out


def jump_integral(u: DiscreteField, edges: EdgeSet, power: int = 2, check: bool = True) -> float:
    """Integral of |[u]|^power over the edges (power 1 or 2)."""
    if power not in (1, 2):
        raise InvalidInput("power must be 1 or 2")
    if check and not edges.issubset(u.jump_set):
        raise InvalidInput("edge set is not contained in the jump set of the field")
    ms, me, ps, pe, inner = edge_traces(u, edges)
    if check and not inner.all():
        raise InvalidInput("edges on the outer boundary have no two-sided trace")
    a, b = ps - ms, pe - me
    L = u.spec.unit
    f = _int_sq_linear if power == 2 else _int_abs_linear
    return float(f(a, b, L).sum())


def trace_integral(u: DiscreteField, edges: EdgeSet, side_cells: np.ndarray, motion: RigidMotion | None = None) -> float:
    """Integral of |u - a|^2 over edges, with u traced from the cells in side_cells."""
    spec = u.spec
    tot = 0.0
    L = spec.unit
    n = spec.n
    xs = spec.to_phys(np.arange(n + 1))
    for kind, arr in (("h", edges.h), ("v", edges.v)):
        idx = np.argwhere(arr)
        if not len(idx):
            continue
        i, j = idx[:, 0], idx[:, 1]
        if kind == "h":
            cands = [((i, j - 1), (2, 3)), ((i, j), (0, 1))]
            p0 = np.stack([xs[i], xs[j]], 1)
            p1 = np.stack([xs[i + 1], xs[j]], 1)
        else:
            cands = [((i - 1, j), (1, 3)), ((i, j), (0, 2))]
            p0 = np.stack([xs[i], xs[j]], 1)
            p1 = np.stack([xs[i], xs[j + 1]], 1)
        for (ci, cj), (c0, c1) in cands:
            ok = (ci >= 0) & (ci < n) & (cj >= 0) & (cj < n)
            ok &= side_cells[np.clip(ci, 0, n - 1), np.clip(cj, 0, n - 1)]
            if not ok.any():
                continue
            a = u.values[ci[ok], cj[ok], c0]
            b = u.values[ci[ok], cj[ok], c1]
            if motion is not None:
                a = a - motion(p0[ok, 0], p0[ok, 1])
                b = b - motion(p1[ok, 0], p1[ok, 1])
            tot += float(_int_sq_linear(a, b, L).sum())
    return tot


# ---------------------------------------------------------------- construction

def field_from_function(spec: LatticeSpec, f, domain=None, jump_set=None) -> DiscreteField:
    """Continuous field by evaluating f(x, y) -> (..., 2) at cell corners."""
    xs = spec.to_phys(np.arange(spec.n + 1))
    Xg, Yg = np.meshgrid(xs, xs, indexing="ij")
    nodal = np.asarray(f(Xg, Yg), float)
    return field_from_nodal(spec, nodal, domain, jump_set)


def field_from_nodal(spec: LatticeSpec, nodal: np.ndarray, domain=None, jump_set=None) -> DiscreteField:
    n = spec.n
    v = np.stack([nodal[:n, :n], nodal[1:, :n], nodal[:n, 1:], nodal[1:, 1:]], 2)
    return DiscreteField(spec, v, domain, jump_set)


def piecewise_field(spec: LatticeSpec, labels: np.ndarray, funcs: dict, domain=None, jump_set=None) -> DiscreteField:
    """Cells with label k take the corner values of funcs[k](x, y)."""
    n = spec.n
    xs = spec.to_phys(np.arange(n + 1))
    Xg, Yg = np.meshgrid(xs, xs, indexing="ij")
    v = np.zeros((n, n, 4, 2))
    for k, f in funcs.items():
        nodal = np.asarray(f(Xg, Yg), float)
        cell = np.stack([nodal[:n, :n], nodal[1:, :n], nodal[:n, 1:], nodal[1:, 1:]], 2)
        m = labels == k
        v[m] = cell[m]
    return DiscreteField(spec, v, domain, jump_set)


def rigid(a, b):
    m = RigidMotion(float(a), (float(b[0]), float(b[1])))
    return lambda x, y: m(x, y)


def _smooth(rng, amplitude, mu, modes=3):
    coef = rng.normal(size=(modes, modes, 2)) * amplitude
    ph = rng.uniform(0, 2 * np.pi, size=(modes, modes, 2))

    def f(x, y):
        out = np.zeros(np.shape(x) + (2,))
        for p in range(modes):
            for q in range(modes):
                for k in range(2):
                    out[..., k] += coef[p, q, k] * np.sin(np.pi * (p + 1) * x / (2 * mu) + ph[p, q, k]) \
                        * np.cos(np.pi * (q + 1) * y / (2 * mu) + ph[p, q, k]) / ((p + 1) * (q + 1))
        return out
    return f


def generate_field(config: Configuration, generator: str, seed: int = 0, amplitude: float = 1.0,
                   target_alpha: float | None = None) -> DiscreteField:
    """Synthetic fields: 'smooth' rigid plus perturbation, 'piecewise_rigid', 'noise'."""
    spec = config.spec
    rng = np.random.default_rng(seed)
    W = config.W()
    jumps = config.crack_edges()
    lab = config.label_mask()
    if generator == "smooth":
        funcs = {}
        base = rigid(rng.normal(), rng.normal(size=2))
        pert = _smooth(rng, amplitude, spec.mu)
        funcs[-1] = lambda x, y, base=base, pert=pert: base(x, y) + pert(x, y)
        for k in range(len(config.components)):
            mk = rigid(rng.normal(), rng.normal(size=2))
            pk = _smooth(rng, amplitude, spec.mu)
            funcs[k] = lambda x, y, mk=mk, pk=pk: mk(x, y) + pk(x, y)
        u = piecewise_field(spec, lab, funcs, W, jumps)
    elif generator == "piecewise_rigid":
        labels = lab.copy()
        funcs = {}
        pieces = connected_components(W)
        for q, piece in enumerate(pieces):
            labels[piece.mask] = 10_000 + q
            funcs[10_000 + q] = rigid(rng.normal() * amplitude, rng.normal(size=2) * amplitude)
        for k in range(len(config.components)):
            funcs[k] = rigid(rng.normal() * amplitude, rng.normal(size=2) * amplitude)
        u = piecewise_field(spec, labels, funcs, W, jumps)
    elif generator == "noise":
        nodal = rng.normal(size=(spec.n + 1, spec.n + 1, 2)) * amplitude * spec.unit
        u = field_from_nodal(spec, nodal, W, jumps)
    else:
        raise InvalidInput(f"unknown field generator {generator!r}")
    if target_alpha is not None:
        a0 = elastic_energy(u)
        if a0 > 0:
            u = u.with_values(u.values * math.sqrt(target_alpha / a0))
    return u


def zero_field(config: Configuration) -> DiscreteField:
    spec = config.spec
    return DiscreteField(spec, np.zeros((spec.n, spec.n, 4, 2)), config.W(), config.crack_edges())


# ---------------------------------------------------------------- extension

def extend(u: DiscreteField, config: Configuration, motions: dict, scope) -> DiscreteField:
    """Replace u on the interiors of the scope components by their rigid motions."""
    scope = list(scope)
    missing = [k for k in scope if k not in motions]
    if missing:
        raise InvalidInput(f"no rigid motion for components {missing}")
    v = np.array(u.values)
    X, Y = u.corner_coords()
    jumps = u.jump_set
    for k in scope:
        m = config.components[k].interior.mask
        vals = motions[k](X[m], Y[m])
        v[m] = vals
        jumps = jumps | config.components[k].gamma
    return DiscreteField(u.spec, v, u.domain, jumps)


# ---------------------------------------------------------------- rigid fits

def _normal_system(u: DiscreteField, m: np.ndarray, center):
    gx, gy = u.gauss_points()
    gx = gx[m] - center[0]
    gy = gy[m] - center[1]
    uv = u.values_at_gauss()[m]
    w = u.spec.unit ** 2 / 4
    # basis: (y, -x), (1, 0), (0, 1)
    B = np.stack([np.stack([gy, -gx], -1), np.stack([np.ones_like(gx), 0 * gx], -1),
                  np.stack([0 * gx, np.ones_like(gx)], -1)], 0)
    G = np.einsum("apk,bpk->ab", B.reshape(3, -1, 2), B.reshape(3, -1, 2)) * w
    r = np.einsum("apk,pk->a", B.reshape(3, -1, 2), uv.reshape(-1, 2)) * w
    uu = float((uv ** 2).sum() * w)
    return G, r, uu


def fit_rigid_motion(u: DiscreteField, region) -> dict:
    """L^2-closest infinitesimal rigid motion on the region (exact quadrature)."""
    spec = u.spec
    m = _mask_of(region, spec)
    if not m.any():
        raise InvalidInput("empty fitting region")
    if m.sum() < 2:
        warnings.warn("fitting region below 2 cells; fit is ill-conditioned", RuntimeWarning)
    cx, cy = spec.cell_centers()
    center = (float(cx[m].mean()), float(cy[m].mean()))
    G, r, uu = _normal_system(u, m, center)
    coef = np.linalg.solve(G, r)
    a = float(coef[0])
    b = (float(coef[1] - a * center[1]), float(coef[2] + a * center[0]))
    residual = max(uu - float(coef @ r), 0.0)
    return {"motion": RigidMotion(a, b), "residual": residual, "norm_sq": uu,
            "projection_sq": float(coef @ r)}


def rigid_l2_sq(motion: RigidMotion, R: Rect, spec: LatticeSpec) -> float:
    """Integral of |a|^2 over the physical rectangle R (closed form)."""
    x0, x1 = spec.to_phys([R.x0, R.x1])
    y0, y1 = spec.to_phys([R.y0, R.y1])
    return rigid_l2_sq_box(motion, x0, y0, x1, y1)


def rigid_l2_sq_box(motion: RigidMotion, x0, y0, x1, y1) -> float:
    w, h = x1 - x0, y1 - y0
    c = motion((x0 + x1) / 2, (y0 + y1) / 2)
    return float(w * h * ((c ** 2).sum() + motion.a ** 2 * (w * w + h * h) / 12))


def rigid_difference(m1: RigidMotion, m2: RigidMotion) -> RigidMotion:
    return RigidMotion(m1.a - m2.a, (m1.b[0] - m2.b[0], m1.b[1] - m2.b[1]))


def rigid_ratio_rectangle(motion: RigidMotion, x0, y0, x1, y1) -> dict:
    """Ratios of the two rigid-motion bounds on a rectangle to (1/|D|) ||a||^2."""
    area = (x1 - x0) * (y1 - y0)
    avg = rigid_l2_sq_box(motion, x0, y0, x1, y1) / area
    diam2 = (x1 - x0) ** 2 + (y1 - y0) ** 2
    corners = motion(np.array([x0, x1, x0, x1]), np.array([y0, y0, y1, y1]))
    sup = float((corners ** 2).sum(-1).max())
    if avg == 0:
        return {"grad": 0.0, "sup": 0.0}
    return {"grad": diam2 * motion.frob() ** 2 / avg, "sup": sup / avg}


def rigid_ratio_segment(motion: RigidMotion, p0, p1) -> float:
    """(l^2 |A|^2 + max |a|^2) / (l^-1 int_S |a|^2) on the segment p0 -> p1."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    l = float(np.hypot(*(p1 - p0)))
    a = motion(p0[0], p0[1])
    b = motion(p1[0], p1[1])
    integral = float(_int_sq_linear(a[None], b[None], l)[0])
    lhs = l * l * motion.frob() ** 2 + max((a ** 2).sum(), (b ** 2).sum())
    if integral == 0:
        return 0.0
    return lhs / (integral / l)


def chained_rigid_fit(u: DiscreteField, path) -> dict:
    """Per-square rigid fits along a path of equal lattice squares and their spread."""
    spec = u.spec
    path = list(path)
    if not path:
        raise InvalidInput("empty path")
    for a, b in zip(path, path[1:]):
        if not _linked(a, b):
            raise InvalidInput("path squares must share an edge or overlap")
    fits = [fit_rigid_motion(u, R)["motion"] for R in path]
    spread = 0.0
    for j, Q in enumerate(path):
        for i1 in range(len(fits)):
            for i2 in range(i1 + 1, len(fits)):
                d = rigid_difference(fits[i1], fits[i2])
                spread = max(spread, math.sqrt(rigid_l2_sq(d, Q, spec)))
    chain = 0.0
    for i in range(len(path) - 1):
        d = rigid_difference(fits[i], fits[i + 1])
        chain += math.sqrt(_union_l2_sq(d, path[i], path[i + 1], spec))
    centers = np.array([[(R.x0 + R.x1) / 2, (R.y0 + R.y1) / 2] for R in path]) * spec.unit
    dmax = float(np.max(np.linalg.norm(centers[:, None] - centers[None], axis=-1))) if len(path) > 1 else 0.0
    half = path[0].width * spec.unit / 2
    bound_unit = dmax / half * chain
    measured = spread / bound_unit if bound_unit > 0 else 0.0
    return {"motions": fits, "spread": spread, "chain_sum": chain, "d": dmax, "measured_C": measured}


def _linked(a: Rect, b: Rect) -> bool:
    """Squares overlap or share a boundary segment of positive length."""
    ox = min(a.x1, b.x1) - max(a.x0, b.x0)
    oy = min(a.y1, b.y1) - max(a.y0, b.y0)
    return ox >= 0 and oy >= 0 and (ox > 0 or oy > 0)


def _union_l2_sq(d: RigidMotion, a: Rect, b: Rect, spec: LatticeSpec) -> float:
    tot = rigid_l2_sq(d, a, spec) + rigid_l2_sq(d, b, spec)
    x0, y0, x1, y1 = max(a.x0, b.x0), max(a.y0, b.y0), min(a.x1, b.x1), min(a.y1, b.y1)
    if x1 > x0 and y1 > y0:
        tot -= rigid_l2_sq(d, Rect(x0, y0, x1, y1), spec)
    return max(tot, 0.0)


# ---------------------------------------------------------------- total variation and traces

def total_variation_E(u: DiscreteField, D=None) -> float:
    """|E u|(D) for a field without Cantor part: strain L^1 plus jump L^1 inside D."""
    spec = u.spec
    m = _mask_of(D, spec)
    hm, vm = interior_edge_masks(m)
    es = EdgeSet(spec, u.jump_set.h & hm, u.jump_set.v & vm)
    return strain_l1(u, m) + jump_integral(u, es, 1, check=False)


def split_inequality(u: DiscreteField, D=None) -> dict:
    """Both sides of (|Eu|(D))^2 <= 2|D| alpha(D) + 2 H^1(D cap J) int |[u]|^2."""
    spec = u.spec
    m = _mask_of(D, spec)
    hm, vm = interior_edge_masks(m)
    es = EdgeSet(spec, u.jump_set.h & hm, u.jump_set.v & vm)
    lhs = total_variation_E(u, m) ** 2
    area = m.sum() * spec.unit ** 2
    rhs = 2 * area * elastic_energy(u, m) + 2 * es.length() * jump_integral(u, es, 2, check=False)
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1 + 1e-9) + 1e-300}


def boundary_trace_norm(u: DiscreteField, Q: Rect, rects=(), C: float = 2.0) -> dict:
    """Boundary L^2 norm of u on a lattice square Q against the three-term bound."""
    spec = u.spec
    qm = Q.mask(spec)
    dQ = Q.boundary(spec)
    lhs = trace_integral(u, dQ, qm)
    mu_q = Q.width * spec.unit / 2
    alpha = elastic_energy(u, qm)
    l2 = l2_norm_sq(u, qm)
    hm, vm = interior_edge_masks(qm)
    total_len = 0.0
    weighted = 0.0
    for R in rects:
        g = R.boundary(spec)
        L = g.length()
        inside = EdgeSet(spec, g.h & hm, g.v & vm)
        total_len += L
        if L > 0 and inside:
            weighted += jump_integral(u, inside, 2, check=False) / L
    bracket = mu_q * alpha + l2 / mu_q + total_len * weighted
    ratio = lhs / bracket if bracket > 0 else (0.0 if lhs == 0 else math.inf)
    return {"lhs": lhs, "rhs": C * bracket, "ratio": ratio, "passes": lhs <= C * bracket * (1 + 1e-12)}


# ---------------------------------------------------------------- snapshots

def snapshot_header(u: DiscreteField) -> dict:
    return {"format": "crackset-field", "version": 1, "mu": u.spec.mu, "s": u.spec.s,
            "shape": list(u.values.shape), "dtype": "<f8", "order": "C",
            "corners": ["(i,j)", "(i+1,j)", "(i,j+1)", "(i+1,j+1)"]}
