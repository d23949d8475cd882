"""Rectilinear set algebra on the square lattice of the ambient square.

The ambient square of half side ``mu`` is tiled by ``n x n`` cells of side
``2s`` with ``n = mu / s``. Cell ``(i, j)`` has x index ``i`` and y index
``j``. Vertex coordinates are integers in ``[0, n]`` measured in units of
``2s``; physical coordinates are ``-mu + 2s * v``.

Edges are stored as two boolean arrays:
  h[i, j]  horizontal unit edge [i, i+1] x {j},  shape (n, n+1)
  v[i, j]  vertical unit edge {i} x [j, j+1],    shape (n+1, n)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    mu: float
    s: float

    def __post_init__(self):
        if not (self.mu > 0 and self.s > 0):
            raise InvalidInput("mu and s must be positive")
        half = self.mu / (2 * self.s)
        k = int(round(half))
        if abs(half - k) > 1e-9 * max(1.0, half):
            raise InvalidInput(f"mu/(2s) = {half} is not an integer")
        if k < 8:
            raise InvalidInput(f"mu/(2s) = {k} < 8: lattice too coarse")

    @property
    def half_cells(self) -> int:
        return int(round(self.mu / (2 * self.s)))

    @property
    def n(self) -> int:
        return 2 * self.half_cells

    @property
    def unit(self) -> float:
        """Physical length of one lattice edge."""
        return 2 * self.s

    def to_phys(self, v):
        return -self.mu + self.unit * np.asarray(v, dtype=float)

    def cell_centers(self):
        c = self.to_phys(np.arange(self.n) + 0.5)
        return np.meshgrid(c, c, indexing="ij")


@dataclass(frozen=True)
class Rect:
    """Closed lattice rectangle [x0, x1] x [y0, y1] in vertex coordinates."""
    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise InvalidInput(f"degenerate rectangle {self.as_tuple()}")

    def as_tuple(self):
        return (self.x0, self.y0, self.x1, self.y1)

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    def inside(self, spec: LatticeSpec) -> bool:
        """Closure contained in the open ambient square."""
        return self.x0 >= 1 and self.y0 >= 1 and self.x1 <= spec.n - 1 and self.y1 <= spec.n - 1

    def within(self, spec: LatticeSpec) -> bool:
        """Closure contained in the closed ambient square."""
        return self.x0 >= 0 and self.y0 >= 0 and self.x1 <= spec.n and self.y1 <= spec.n

    def mask(self, spec: LatticeSpec) -> np.ndarray:
        m = np.zeros((spec.n, spec.n), dtype=bool)
        m[max(self.x0, 0):max(self.x1, 0), max(self.y0, 0):max(self.y1, 0)] = True
        return m

    def gridset(self, spec: LatticeSpec) -> "GridSet":
        return GridSet(spec, self.mask(spec))

    def boundary(self, spec: LatticeSpec) -> "EdgeSet":
        return boundary_edges(self.mask(spec), spec)

    def dilate(self, k: int) -> "Rect":
        return Rect(self.x0 - k, self.y0 - k, self.x1 + k, self.y1 + k)

    def clip(self, spec: LatticeSpec) -> "Rect":
        return Rect(max(self.x0, 0), max(self.y0, 0), min(self.x1, spec.n), min(self.y1, spec.n))

    def contains_rect(self, other: "Rect") -> bool:
        return self.x0 <= other.x0 and self.y0 <= other.y0 and other.x1 <= self.x1 and other.y1 <= self.y1

    def overlaps(self, other: "Rect") -> bool:
        """Open interiors intersect."""
        return self.x0 < other.x1 and other.x0 < self.x1 and self.y0 < other.y1 and other.y0 < self.y1

    def closed_meets(self, other: "Rect") -> bool:
        return self.x0 <= other.x1 and other.x0 <= self.x1 and self.y0 <= other.y1 and other.y0 <= self.y1

    def perimeter(self) -> int:
        return 2 * (self.width + self.height)

    def diam(self) -> float:
        return float(np.hypot(self.width, self.height))


class GridSet:
    """Immutable set of lattice cells stored as an n x n boolean mask."""

    __slots__ = ("spec", "mask")

    def __init__(self, spec: LatticeSpec, mask: np.ndarray):
        m = np.array(mask, dtype=bool, copy=True)
        if m.shape != (spec.n, spec.n):
            raise InvalidInput(f"mask shape {m.shape} != {(spec.n, spec.n)}")
        m.setflags(write=False)
        self.spec = spec
        self.mask = m

    @classmethod
    def empty(cls, spec):
        return cls(spec, np.zeros((spec.n, spec.n), dtype=bool))

    @classmethod
    def full(cls, spec):
        return cls(spec, np.ones((spec.n, spec.n), dtype=bool))

    @classmethod
    def from_cells(cls, spec, cells: Iterable[tuple[int, int]]):
        m = np.zeros((spec.n, spec.n), dtype=bool)
        for i, j in cells:
            if not (0 <= i < spec.n and 0 <= j < spec.n):
                raise InvalidInput(f"cell {(i, j)} outside the ambient square")
            m[i, j] = True
        return cls(spec, m)

    @property
    def cells(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in np.argwhere(self.mask)}

    def __len__(self):
        return int(self.mask.sum())

    def __bool__(self):
        return bool(self.mask.any())

    def __contains__(self, p):
        i, j = p
        return 0 <= i < self.spec.n and 0 <= j < self.spec.n and bool(self.mask[i, j])

    def area(self) -> float:
        return len(self) * self.spec.unit ** 2

    def __or__(self, other):
        return GridSet(self.spec, self.mask | other.mask)

    def __and__(self, other):
        return GridSet(self.spec, self.mask & other.mask)

    def __sub__(self, other):
        return GridSet(self.spec, self.mask & ~other.mask)

    def complement(self):
        return GridSet(self.spec, ~self.mask)

    def issubset(self, other) -> bool:
        return not (self.mask & ~other.mask).any()

    def __eq__(self, other):
        return isinstance(other, GridSet) and self.spec == other.spec and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.spec, self.mask.tobytes()))

    def bbox(self) -> Rect:
        return bbox_of_mask(self.mask)

    def boundary(self) -> "EdgeSet":
        return boundary_edges(self.mask, self.spec)

    def touches_outer(self) -> bool:
        m = self.mask
        return bool(m[0, :].any() or m[-1, :].any() or m[:, 0].any() or m[:, -1].any())

    def __repr__(self):
        return f"GridSet(n={self.spec.n}, cells={len(self)})"


def bbox_of_mask(mask: np.ndarray) -> Rect:
    xs = np.flatnonzero(mask.any(axis=1))
    ys = np.flatnonzero(mask.any(axis=0))
    if xs.size == 0:
        raise InvalidInput("bounding box of an empty set")
    return Rect(int(xs[0]), int(ys[0]), int(xs[-1]) + 1, int(ys[-1]) + 1)


class EdgeSet:
    """Immutable set of unit lattice edges."""

    __slots__ = ("spec", "h", "v")

    def __init__(self, spec: LatticeSpec, h: np.ndarray, v: np.ndarray):
        n = spec.n
        h = np.array(h, dtype=bool, copy=True)
        v = np.array(v, dtype=bool, copy=True)
        if h.shape != (n, n + 1) or v.shape != (n + 1, n):
            raise InvalidInput("edge array shape mismatch")
        h.setflags(write=False)
        v.setflags(write=False)
        self.spec, self.h, self.v = spec, h, v

    @classmethod
    def empty(cls, spec):
        n = spec.n
        return cls(spec, np.zeros((n, n + 1), bool), np.zeros((n + 1, n), bool))

    @classmethod
    def from_edges(cls, spec, edges: Iterable[tuple[str, int, int]]):
        n = spec.n
        h = np.zeros((n, n + 1), bool)
        v = np.zeros((n + 1, n), bool)
        for kind, i, j in edges:
            (h if kind == "h" else v)[i, j] = True
        return cls(spec, h, v)

    @property
    def edges(self) -> set[tuple[str, int, int]]:
        out = {("h", int(i), int(j)) for i, j in np.argwhere(self.h)}
        out |= {("v", int(i), int(j)) for i, j in np.argwhere(self.v)}
        return out

    def count(self) -> int:
        return int(self.h.sum() + self.v.sum())

    def length(self) -> float:
        return self.count() * self.spec.unit

    def __len__(self):
        return self.count()

    def __bool__(self):
        return bool(self.h.any() or self.v.any())

    def __or__(self, o):
        return EdgeSet(self.spec, self.h | o.h, self.v | o.v)

    def __and__(self, o):
        return EdgeSet(self.spec, self.h & o.h, self.v & o.v)

    def __sub__(self, o):
        return EdgeSet(self.spec, self.h & ~o.h, self.v & ~o.v)

    def issubset(self, o) -> bool:
        return not ((self.h & ~o.h).any() or (self.v & ~o.v).any())

    def __eq__(self, o):
        return (isinstance(o, EdgeSet) and self.spec == o.spec
                and np.array_equal(self.h, o.h) and np.array_equal(self.v, o.v))

    def __hash__(self):
        return hash((self.spec, self.h.tobytes(), self.v.tobytes()))

    def projections(self) -> tuple[int, int]:
        """Exact lengths (lattice units) of the projections onto the axes."""
        return int(self.h.any(axis=1).sum()), int(self.v.any(axis=0).sum())

    def diam_inf(self) -> float:
        p1, p2 = self.projections()
        return float(np.hypot(p1, p2)) * self.spec.unit

    def in_closed_rect(self, r: Rect) -> "EdgeSet":
        """Edges lying in the closed rectangle r."""
        n = self.spec.n
        hm = np.zeros((n, n + 1), bool)
        vm = np.zeros((n + 1, n), bool)
        hm[max(r.x0, 0):max(r.x1, 0), max(r.y0, 0):max(r.y1 + 1, 0)] = True
        vm[max(r.x0, 0):max(r.x1 + 1, 0), max(r.y0, 0):max(r.y1, 0)] = True
        return EdgeSet(self.spec, self.h & hm, self.v & vm)

    def in_open(self, cells: np.ndarray) -> "EdgeSet":
        """Edges lying in the open set formed by a cell mask (both sides inside)."""
        hm, vm = interior_edge_masks(cells)
        return EdgeSet(self.spec, self.h & hm, self.v & vm)

    def touching(self, cells: np.ndarray) -> "EdgeSet":
        """Edges with at least one adjacent cell in the mask."""
        hm, vm = adjacent_edge_masks(cells)
        return EdgeSet(self.spec, self.h & hm, self.v & vm)

    def bbox(self) -> tuple[int, int, int, int]:
        xs, ys = [], []
        hi = np.argwhere(self.h)
        vi = np.argwhere(self.v)
        if hi.size:
            xs += [hi[:, 0].min(), hi[:, 0].max() + 1]
            ys += [hi[:, 1].min(), hi[:, 1].max()]
        if vi.size:
            xs += [vi[:, 0].min(), vi[:, 0].max()]
            ys += [vi[:, 1].min(), vi[:, 1].max() + 1]
        if not xs:
            raise InvalidInput("bounding box of an empty edge set")
        return int(min(xs)), int(min(ys)), int(max(xs)), int(max(ys))

    def __repr__(self):
        return f"EdgeSet(n={self.spec.n}, edges={self.count()})"


def boundary_edges(mask: np.ndarray, spec: LatticeSpec) -> EdgeSet:
    """Topological boundary of the union of closed cells, as lattice edges."""
    p = np.pad(mask, 1)
    h = p[1:-1, :-1] ^ p[1:-1, 1:]
    v = p[:-1, 1:-1] ^ p[1:, 1:-1]
    return EdgeSet(spec, h, v)


def interior_edge_masks(cells: np.ndarray):
    p = np.pad(cells, 1)
    return p[1:-1, :-1] & p[1:-1, 1:], p[:-1, 1:-1] & p[1:, 1:-1]


def adjacent_edge_masks(cells: np.ndarray):
    p = np.pad(cells, 1)
    return p[1:-1, :-1] | p[1:-1, 1:], p[:-1, 1:-1] | p[1:, 1:-1]


def edge_cells_mask(es: EdgeSet) -> np.ndarray:
    """Cells adjacent to at least one edge of the set."""
    n = es.spec.n
    m = np.zeros((n + 2, n + 2), bool)
    hi = np.argwhere(es.h)
    vi = np.argwhere(es.v)
    m[hi[:, 0] + 1, hi[:, 1]] = True
    m[hi[:, 0] + 1, hi[:, 1] + 1] = True
    m[vi[:, 0], vi[:, 1] + 1] = True
    m[vi[:, 0] + 1, vi[:, 1] + 1] = True
    return m[1:-1, 1:-1]


@dataclass(frozen=True)
class BoundaryComponent:
    interior: GridSet
    gamma: EdgeSet
    theta: EdgeSet
    weight: float = 1.0
    rect: Rect | None = None
    touches_outer_boundary: bool = False

    def diam_inf(self) -> float:
        return self.gamma.diam_inf()

    def bbox(self) -> Rect:
        return self.interior.bbox()

    def is_rectangle(self) -> bool:
        b = self.bbox()
        return len(self.interior) == b.width * b.height

    def is_rectangular(self) -> bool:
        """Gamma = Theta = boundary of a rectangle."""
        return self.is_rectangle() and self.theta == self.gamma


@dataclass(frozen=True)
class Configuration:
    """Q_mu minus an ordered list of component interiors.

    ``origin[k]`` is the index of component k in the configuration this one was
    derived from (None for a freshly inserted rectangle).
    """
    spec: LatticeSpec
    components: tuple[BoundaryComponent, ...]
    lam: float = 0.0
    origin: tuple = field(default=(), compare=False)

    @classmethod
    def build(cls, spec, interiors: Sequence[GridSet], weights=None, rects=None, lam=0.0, origin=None):
        """Assemble a configuration in the given order, computing gamma and theta."""
        k = len(interiors)
        weights = [1.0] * k if weights is None else list(weights)
        rects = [None] * k if rects is None else list(rects)
        origin = tuple(range(k)) if origin is None else tuple(origin)
        comps = []
        n = spec.n
        seen_h = np.zeros((n, n + 1), bool)
        seen_v = np.zeros((n + 1, n), bool)
        for X, w, R in zip(interiors, weights, rects):
            g = X.boundary()
            th = EdgeSet(spec, g.h & ~seen_h, g.v & ~seen_v)
            seen_h |= g.h
            seen_v |= g.v
            comps.append(BoundaryComponent(X, g, th, float(w), R, X.touches_outer()))
        return cls(spec, tuple(comps), float(lam), origin)

    def __len__(self):
        return len(self.components)

    def removed_mask(self) -> np.ndarray:
        m = np.zeros((self.spec.n, self.spec.n), bool)
        for c in self.components:
            m |= c.interior.mask
        return m

    def W(self) -> GridSet:
        return GridSet(self.spec, ~self.removed_mask())

    def interior_indices(self) -> list[int]:
        return [k for k, c in enumerate(self.components) if not c.touches_outer_boundary]

    def crack_edges(self) -> EdgeSet:
        """Union of all boundary components."""
        out = EdgeSet.empty(self.spec)
        for c in self.components:
            out = out | c.gamma
        return out

    def interior_crack_edges(self) -> EdgeSet:
        out = EdgeSet.empty(self.spec)
        for c in self.components:
            if not c.touches_outer_boundary:
                out = out | c.gamma
        return out

    def label_mask(self) -> np.ndarray:
        """Cell -> component index (or -1); later components never overwrite earlier ones."""
        lab = -np.ones((self.spec.n, self.spec.n), dtype=int)
        for k in range(len(self.components) - 1, -1, -1):
            lab[self.components[k].interior.mask] = k
        return lab

    def with_weights(self, weights) -> "Configuration":
        comps = tuple(BoundaryComponent(c.interior, c.gamma, c.theta, float(w), c.rect, c.touches_outer_boundary)
                      for c, w in zip(self.components, weights))
        return Configuration(self.spec, comps, self.lam, tuple(range(len(comps))))

    def with_rects(self, rects) -> "Configuration":
        comps = tuple(BoundaryComponent(c.interior, c.gamma, c.theta, c.weight, r, c.touches_outer_boundary)
                      for c, r in zip(self.components, rects))
        return Configuration(self.spec, comps, self.lam, tuple(range(len(comps))))

    def with_lam(self, lam) -> "Configuration":
        return Configuration(self.spec, self.components, float(lam), self.origin)

    def reordered(self, order: Sequence[int]) -> "Configuration":
        cs = [self.components[k] for k in order]
        return Configuration.build(self.spec, [c.interior for c in cs], [c.weight for c in cs],
                                   [c.rect for c in cs], self.lam)


def _bbox_key(X: GridSet):
    return X.bbox().as_tuple()


def components_of(cells_removed: GridSet, spec: LatticeSpec, grouping: Sequence[Iterable[tuple[int, int]]],
                  weights=None, rects=None, lam=0.0, order: str = "bbox") -> Configuration:
    """One component per group; interior groups first, outer-touching groups last.

    With ``order="bbox"`` components are sorted by bounding-box corner within
    each class; ``order="given"`` keeps the caller's order within each class.
    """
    groups = []
    total = np.zeros((spec.n, spec.n), dtype=int)
    for g in grouping:
        X = g if isinstance(g, GridSet) else GridSet.from_cells(spec, g)
        if not X:
            raise InvalidInput("empty group")
        if not X.issubset(cells_removed):
            raise InvalidInput("group is not a subset of the removed cells")
        total += X.mask
        groups.append(X)
    if (total > 1).any():
        raise InvalidInput("groups overlap")
    if not np.array_equal(total > 0, cells_removed.mask):
        raise InvalidInput("grouping does not cover the removed cells")
    k = len(groups)
    weights = [1.0] * k if weights is None else list(weights)
    rects = [None] * k if rects is None else list(rects)
    idx = list(range(k))
    if order == "bbox":
        idx.sort(key=lambda a: _bbox_key(groups[a]))
    idx.sort(key=lambda a: groups[a].touches_outer())
    return Configuration.build(spec, [groups[a] for a in idx], [weights[a] for a in idx],
                               [rects[a] for a in idx], lam, origin=idx)


def fill_holes(config: Configuration) -> GridSet:
    """W together with all components that do not touch the outer boundary."""
    m = np.ones((config.spec.n, config.spec.n), bool)
    for c in config.components:
        if c.touches_outer_boundary:
            m &= ~c.interior.mask
    return GridSet(config.spec, m)


def connected_components(s: GridSet, diagonal: bool = False) -> list[GridSet]:
    """Maximal edge-connected pieces, ordered by their smallest cell index."""
    if not s:
        return []
    structure = np.ones((3, 3), bool) if diagonal else None
    lab, k = ndimage.label(s.mask, structure=structure)
    flat = lab.ravel()
    nz = np.flatnonzero(flat)
    first = np.full(k + 1, flat.size)
    np.minimum.at(first, flat[nz], nz)
    order = np.argsort(first[1:]) + 1
    return [GridSet(s.spec, lab == c) for c in order]


def is_connected(mask: np.ndarray, diagonal: bool = False) -> bool:
    if not mask.any():
        return True
    structure = np.ones((3, 3), bool) if diagonal else None
    _, k = ndimage.label(mask, structure=structure)
    return k == 1


def smallest_enclosing_rectangle(items) -> Rect:
    """Minimal lattice rectangle whose closure contains every item.

    Items may be Rect, EdgeSet, GridSet or BoundaryComponent.
    """
    boxes = []
    for it in items:
        if isinstance(it, Rect):
            boxes.append(it.as_tuple())
        elif isinstance(it, EdgeSet):
            if it:
                boxes.append(it.bbox())
        elif isinstance(it, GridSet):
            if it:
                boxes.append(it.bbox().as_tuple())
        elif isinstance(it, BoundaryComponent):
            boxes.append(it.gamma.bbox())
        else:
            raise InvalidInput(f"unsupported item {type(it).__name__}")
    if not boxes:
        raise InvalidInput("no items to enclose")
    b = np.array(boxes)
    return Rect(int(b[:, 0].min()), int(b[:, 1].min()), int(b[:, 2].max()), int(b[:, 3].max()))
