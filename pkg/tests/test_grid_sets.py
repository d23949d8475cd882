import numpy as np
import pytest
from hypothesis import given, strategies as st

from crackset.grid_sets import (Configuration, EdgeSet, GridSet, InvalidInput, LatticeSpec, Rect,
                                components_of, connected_components, fill_holes, smallest_enclosing_rectangle)

from conftest import cell_edges, flood_fill

SPEC = LatticeSpec(1.0, 1.0 / 16)


def rect_cells(x0, y0, x1, y1):
    return [(i, j) for i in range(x0, x1) for j in range(y0, y1)]


def test_lattice_rejects_coarse_and_non_integer():
    with pytest.raises(InvalidInput):
        LatticeSpec(1.0, 1.0 / 8)
    with pytest.raises(InvalidInput):
        LatticeSpec(1.0, 0.03)
    assert LatticeSpec(1.0, 1.0 / 64).n == 64


def test_single_cell_component():
    cfg = components_of(GridSet.from_cells(SPEC, [(8, 8)]), SPEC, [[(8, 8)]])
    c = cfg.components[0]
    assert c.gamma.length() == pytest.approx(8 * SPEC.s)
    assert c.theta == c.gamma


def test_shared_edge_theta_matches_edge_enumeration():
    a, b = rect_cells(4, 4, 6, 6), rect_cells(6, 4, 8, 7)
    cfg = components_of(GridSet.from_cells(SPEC, a + b), SPEC, [a, b], order="given")
    ga, gb = cell_edges(a), cell_edges(b)
    assert cfg.components[0].gamma.edges == ga
    assert cfg.components[1].theta.edges == gb - ga
    assert len(gb - ga) == len(gb) - 2
    assert cfg.components[1].theta.length() == pytest.approx(cfg.components[1].gamma.length() - 2 * SPEC.unit)


def test_empty_grouping():
    cfg = components_of(GridSet.empty(SPEC), SPEC, [])
    assert len(cfg) == 0
    assert cfg.crack_edges().count() == 0


def test_group_errors():
    X = GridSet.from_cells(SPEC, [(3, 3)])
    with pytest.raises(InvalidInput):
        components_of(X, SPEC, [[(4, 4)]])
    with pytest.raises(InvalidInput):
        components_of(GridSet.from_cells(SPEC, [(3, 3), (5, 5)]), SPEC, [[(3, 3)]])


def test_outer_components_ordered_last():
    inner, outer = rect_cells(1, 1, 3, 3), rect_cells(0, 10, 2, 12)
    cfg = components_of(GridSet.from_cells(SPEC, inner + outer), SPEC, [outer, inner])
    assert [c.touches_outer_boundary for c in cfg.components] == [False, True]


def test_fill_holes():
    assert fill_holes(Configuration.build(SPEC, [])) == GridSet.full(SPEC)
    inner = rect_cells(5, 5, 7, 8)
    cfg = components_of(GridSet.from_cells(SPEC, inner), SPEC, [inner])
    assert fill_holes(cfg) == GridSet.full(SPEC)
    edge = rect_cells(0, 3, 2, 5)
    cfg = components_of(GridSet.from_cells(SPEC, inner + edge), SPEC, [inner, edge])
    expected = {(i, j) for i in range(16) for j in range(16)} - set(edge)
    assert fill_holes(cfg).cells == expected


def test_connected_components_simple():
    assert connected_components(GridSet.empty(SPEC)) == []
    parts = connected_components(GridSet.from_cells(SPEC, [(2, 2), (3, 3)]))
    assert [p.cells for p in parts] == [{(2, 2)}, {(3, 3)}]


@given(st.integers(0, 2**32 - 1), st.floats(0.2, 0.6))
def test_connected_components_match_flood_fill(seed, density):
    mask = np.random.default_rng(seed).random((16, 16)) < density
    got = [p.cells for p in connected_components(GridSet(SPEC, mask))]
    assert got == flood_fill(mask)


def test_smallest_enclosing_rectangle():
    R = Rect(2, 3, 5, 7)
    assert smallest_enclosing_rectangle([R]) == R
    assert smallest_enclosing_rectangle([R, Rect(9, 1, 10, 4)]) == Rect(2, 1, 10, 7)
    with pytest.raises(InvalidInput):
        smallest_enclosing_rectangle([])


@given(st.integers(0, 2**32 - 1))
def test_enclosing_rectangle_matches_vertex_scan(seed):
    rng = np.random.default_rng(seed)
    mask = rng.random((16, 16)) < 0.05
    mask[rng.integers(16), rng.integers(16)] = True
    es = GridSet(SPEC, mask).boundary()
    x0, y0 = rng.integers(0, 14, 2)
    R = Rect(int(x0), int(y0), int(x0) + 2, int(y0) + 2)
    xs, ys = [R.x0, R.x1], [R.y0, R.y1]
    for kind, i, j in es.edges:
        xs += [i, i + 1] if kind == "h" else [i]
        ys += [j] if kind == "h" else [j, j + 1]
    assert smallest_enclosing_rectangle([R, es]) == Rect(min(xs), min(ys), max(xs), max(ys))


def random_grouping(rng):
    mask = rng.random((16, 16)) < 0.3
    parts = connected_components(GridSet(SPEC, mask))
    return GridSet(SPEC, mask), [p.cells for p in parts]


@given(st.integers(0, 2**32 - 1))
def test_theta_total_is_order_independent(seed):
    rng = np.random.default_rng(seed)
    X, groups = random_grouping(rng)
    cfg = components_of(X, SPEC, groups, order="given")
    union = cfg.crack_edges().count()
    assert sum(c.theta.count() for c in cfg.components) == union
    perm = rng.permutation(len(cfg.components))
    shuffled = cfg.reordered(list(perm))
    assert sum(c.theta.count() for c in shuffled.components) == union


@given(st.integers(0, 2**32 - 1))
def test_fill_holes_idempotent_monotone(seed):
    X, groups = random_grouping(np.random.default_rng(seed))
    cfg = components_of(X, SPEC, groups)
    H = fill_holes(cfg)
    assert cfg.W().issubset(H)
    again = components_of(H.complement(), SPEC, [p.cells for p in connected_components(H.complement())])
    assert fill_holes(again) == H


@given(st.integers(0, 2**32 - 1))
def test_components_round_trip_edges(seed):
    X, groups = random_grouping(np.random.default_rng(seed))
    cfg = components_of(X, SPEC, groups)
    for c in cfg.components:
        assert c.gamma.edges == cell_edges(c.interior.cells)
        assert c.gamma == c.interior.boundary()
