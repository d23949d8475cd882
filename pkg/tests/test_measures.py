import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crackset.grid_sets import (Configuration, GridSet, InvalidInput, LatticeSpec, Rect, components_of,
                                connected_components, smallest_enclosing_rectangle)
from crackset.measures import (Params, check_rect_comparable, diam_inf, measure_omega, measure_star,
                               total_measures, validate_class)

from conftest import cell_edges

SPEC = LatticeSpec(1.0, 1.0 / 16)
P = Params()


def comp(cells):
    return components_of(GridSet.from_cells(SPEC, cells), SPEC, [cells]).components[0]


def rect_cells(x0, y0, x1, y1):
    return [(i, j) for i in range(x0, x1) for j in range(y0, y1)]


def test_diam_inf_values():
    s = SPEC.s
    assert diam_inf(comp([(4, 4)])) == pytest.approx(2 * math.sqrt(2) * s)
    assert diam_inf(comp(rect_cells(4, 4, 7, 5))) == pytest.approx(2 * math.sqrt(10) * s)


def test_diam_inf_of_l_shape_is_bbox_diameter():
    L = rect_cells(3, 3, 8, 4) + rect_cells(3, 4, 4, 9)
    c = comp(L)
    R = smallest_enclosing_rectangle([c.gamma])
    assert diam_inf(c) == pytest.approx(R.diam() * SPEC.unit)


def test_measure_star_endpoints():
    assert measure_star(3.0, 2.0, P.with_(h_star=0.0)) == 2.0
    assert measure_star(3.0, 2.0, P.with_(h_star=1.0)) == 3.0
    assert measure_omega(3.0, 2.0, 1.0, P) == measure_star(3.0, 2.0, P)


@given(st.integers(1, 15), st.integers(1, 15))
def test_rectangle_boundary_comparison(w, h):
    c = comp(rect_cells(0, 0, w, h))
    H, d = c.gamma.length(), diam_inf(c)
    assert H / math.sqrt(2) <= 2 * d * (1 + 1e-12)
    assert 2 * d <= H * (1 + 1e-12)


def test_totals_zero_and_equal_with_unit_weights():
    assert total_measures(Configuration.build(SPEC, []), P) == {"H": 0, "inf": 0, "star": 0, "omega": 0}
    cells = [rect_cells(2, 2, 4, 4), rect_cells(6, 6, 9, 7), rect_cells(10, 2, 11, 5)]
    cfg = components_of(GridSet.from_cells(SPEC, sum(cells, [])), SPEC, cells)
    t = total_measures(cfg, P)
    assert t["omega"] == pytest.approx(t["star"])


def test_totals_match_per_edge_summation():
    groups = [rect_cells(2, 2, 5, 4), rect_cells(5, 2, 7, 6), rect_cells(3, 8, 4, 12)]
    weights = [1.0, 0.95, 0.9]
    cfg = components_of(GridSet.from_cells(SPEC, sum(groups, [])), SPEC, groups, weights=weights, order="given")
    seen, H, inf, om = set(), 0.0, 0.0, 0.0
    for g, w in zip(groups, weights):
        e = cell_edges(g)
        theta = e - seen
        seen |= e
        xs = {i for k, i, j in e if k == "h"}
        ys = {j for k, i, j in e if k == "v"}
        d = math.hypot(len(xs), len(ys)) * SPEC.unit
        H += len(theta) * SPEC.unit
        inf += d
        om += P.h_star * len(theta) * SPEC.unit + (1 - P.h_star) * w * d
    t = total_measures(cfg, P)
    assert t["H"] == pytest.approx(H, rel=1e-14)
    assert t["inf"] == pytest.approx(inf, rel=1e-14)
    assert t["omega"] == pytest.approx(om, rel=1e-14)


def test_validate_class_examples():
    cells = [rect_cells(2, 2, 4, 4), rect_cells(8, 8, 10, 11)]
    cfg = components_of(GridSet.from_cells(SPEC, sum(cells, [])), SPEC, cells)
    assert validate_class(cfg, P, 0.0).ok
    # reduced weight but no rectangle
    bad = cfg.with_weights([0.95, 1.0])
    assert (0, "i") in validate_class(bad, P, 0.0).failures()
    # reduced weight on a component above the size threshold
    c = cfg.components[0]
    lam = c.diam_inf() / (19 * P.upsilon) * 0.99
    big = bad.with_rects([c.interior.bbox(), None])
    fails = validate_class(big, P, lam).failures()
    assert (0, "iv") in fails


def test_params_constraints():
    Params().checked()
    with pytest.raises(InvalidInput, match="omega_min"):
        Params(omega_min=0.5).checked()
    with pytest.raises(InvalidInput, match="upsilon"):
        Params(upsilon=1e-3).checked()
    with pytest.raises(InvalidInput, match="D >= 32/h_star"):
        Params(D=10).checked()
    with pytest.raises(InvalidInput):
        Params.from_dict({"nope": 1})


def random_component(rng):
    mask = np.zeros((16, 16), bool)
    x, y = rng.integers(3, 13, 2)
    mask[x, y] = True
    for _ in range(rng.integers(0, 12)):
        cand = np.argwhere(mask)
        a, b = cand[rng.integers(len(cand))] + [(1, 0), (-1, 0), (0, 1), (0, -1)][rng.integers(4)]
        if 1 <= a < 15 and 1 <= b < 15:
            mask[a, b] = True
    return mask


@given(st.integers(0, 2**32 - 1))
def test_diam_at_most_half_length(seed):
    c = comp([tuple(x) for x in np.argwhere(random_component(np.random.default_rng(seed)))])
    assert diam_inf(c) <= 0.5 * c.gamma.length() * (1 + 1e-12)


@given(st.integers(0, 2**32 - 1))
def test_removing_a_rectangle_never_increases(seed):
    rng = np.random.default_rng(seed)
    m = random_component(rng)
    x0, y0 = rng.integers(0, 14, 2)
    R = Rect(int(x0), int(y0), int(x0 + rng.integers(1, 4)), int(y0 + rng.integers(1, 4)))
    rest = m & ~R.mask(SPEC)
    if not rest.any():
        return
    g0 = GridSet(SPEC, m).boundary()
    for part in connected_components(GridSet(SPEC, rest)):
        g = part.boundary()
        assert g.diam_inf() <= g0.diam_inf() * (1 + 1e-12)
    g = GridSet(SPEC, rest).boundary()
    # Theta of the remainder after R: edges not on the boundary of R
    theta = g - Rect(R.x0, R.y0, R.x1, R.y1).boundary(SPEC)
    assert theta.count() <= g0.count()


@given(st.integers(0, 2**32 - 1))
def test_union_subadditivity(seed):
    rng = np.random.default_rng(seed)
    a, b = random_component(rng), random_component(rng)
    dV, G, dU = (GridSet(SPEC, x).boundary() for x in (a, b, a | b))
    assert dU.diam_inf() <= (dV.diam_inf() + G.diam_inf()) * (1 + 1e-12)
    assert dU.count() <= dV.count() + (G - dV).count()


@given(st.integers(0, 2**32 - 1))
def test_weighted_rect_comparability(seed):
    rng = np.random.default_rng(seed)
    m = random_component(rng)
    c = comp([tuple(x) for x in np.argwhere(m)])
    assert all(check_rect_comparable(c, SPEC))
