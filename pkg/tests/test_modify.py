import numpy as np
import pytest
from hypothesis import given, strategies as st

from crackset.acceptance import random_rect, random_soup
from crackset.grid_sets import GridSet, fill_holes, InvalidInput, LatticeSpec, Rect, components_of
from crackset.measures import Params, omega_total, rect_star, star_total, validate_class, measure_star
from crackset.modify import (estimate_modification, final_normalize, initial_rectangularization, modify,
                             rectangularize, updated_weight)

SPEC = LatticeSpec(1.0, 1.0 / 16)
P = Params()


def rect_cells(x0, y0, x1, y1):
    return [(i, j) for i in range(x0, x1) for j in range(y0, y1)]


def config(groups, weights=None, rects=None):
    return components_of(GridSet.from_cells(SPEC, sum(groups, [])), SPEC, groups, weights=weights,
                         rects=rects, order="given")


def test_modify_rejects_bad_V():
    cfg = config([rect_cells(3, 3, 5, 5)])
    with pytest.raises(InvalidInput):
        modify(cfg, Rect(0, 2, 4, 4))
    with pytest.raises(InvalidInput):
        modify(cfg.with_lam(10.0), Rect(8, 8, 10, 10))


def test_modify_disjoint_V_adds_one_component():
    cfg = config([rect_cells(3, 3, 5, 5)])
    new = modify(cfg, Rect(8, 8, 11, 10))
    assert len(new) == 2
    assert new.components[0].interior == Rect(8, 8, 11, 10).gridset(SPEC)
    assert new.components[1].interior == cfg.components[0].interior
    assert new.origin == (None, 0)
    est = estimate_modification(cfg, Rect(8, 8, 11, 10), P)
    assert est["L_V"] == []
    assert est["delta_omega"] == pytest.approx(rect_star(Rect(8, 8, 11, 10), SPEC, P))


def test_modify_engulfing_matches_bound():
    groups = [rect_cells(3, 3, 5, 5), rect_cells(6, 3, 7, 6), rect_cells(11, 11, 13, 13)]
    cfg = config(groups, weights=[0.95, 1.0, 1.0], rects=[Rect(3, 3, 5, 5), None, None])
    V = Rect(2, 2, 8, 7)
    est = estimate_modification(cfg, V, P)
    assert est["L_V"] == [0, 1]
    removed = sum(P.h_star * c.theta.length() + (1 - P.h_star) * c.weight * c.diam_inf()
                  for c in cfg.components[:2])
    exact = rect_star(V, SPEC, P) - removed
    assert est["delta_omega"] == pytest.approx(exact)
    assert est["delta_omega"] <= est["bound_ii"] + 1e-12
    assert est["delta_omega"] <= est["bound_i"] + 1e-12


def test_weight_update_on_sliced_component():
    groups = [rect_cells(2, 2, 8, 4), rect_cells(10, 2, 12, 6), rect_cells(3, 9, 5, 13)]
    cfg = config(groups, weights=[0.92, 0.95, 1.0], rects=[Rect(2, 2, 8, 4), Rect(10, 2, 12, 6), None])
    new = modify(cfg, Rect(5, 1, 11, 5))
    for k, c in enumerate(new.components[1:], 1):
        old = cfg.components[new.origin[k]]
        assert c.weight >= old.weight
        assert c.weight * c.diam_inf() <= old.weight * old.diam_inf() * (1 + 1e-12)


def test_updated_weight_rule():
    assert updated_weight(1.0, 2.0, 1.0) == 1.0
    assert updated_weight(0.9, 2.0, 1.0) == 1.0
    assert updated_weight(0.9, 2.0, 1.9) == pytest.approx(0.9 * 2 / 1.9)


@given(st.integers(0, 2**32 - 1))
def test_modify_invariants(seed):
    rng = np.random.default_rng(seed)
    cfg = random_soup(rng, 16, int(rng.integers(1, 6)))
    ws = rng.uniform(0.9, 1.0, len(cfg))
    cfg = cfg.with_weights(ws)
    V = random_rect(rng, 16, 1, 15, max_side=6)
    new = modify(cfg, V, check_lambda=False)
    est = estimate_modification(cfg, V, P)
    assert est["delta_omega"] <= est["bound_ii"] + 1e-12
    for k, c in enumerate(new.components[1:], 1):
        old = cfg.components[new.origin[k]]
        assert c.weight >= old.weight
        assert c.weight * c.diam_inf() <= old.weight * old.diam_inf() * (1 + 1e-12)
        assert c.theta.count() <= old.theta.count()


def test_rectangularize_fixed_point():
    cfg = config([rect_cells(3, 3, 5, 5)])
    rr = rectangularize(cfg, Rect(9, 9, 11, 12), P)
    assert rr.V == Rect(9, 9, 11, 12)
    assert rr.choices == []


def test_rectangularize_absorbs_overlapped_rectangle():
    cfg = config([rect_cells(3, 3, 6, 6)])
    V = Rect(5, 5, 9, 8)
    rr = rectangularize(cfg, V, P)
    assert rr.V == Rect(3, 3, 9, 8)
    assert validate_class(rr.config, P, 0.0).ok
    assert omega_total(rr.config, P) <= omega_total(modify(cfg, V), P)


def test_rectangularize_chain_reduces_components():
    groups = [rect_cells(2, 2, 4, 4), rect_cells(5, 2, 7, 4), rect_cells(8, 2, 10, 4)]
    cfg = config(groups)
    rr = rectangularize(cfg, Rect(3, 3, 9, 5), P)
    assert len(rr.config) < len(cfg)
    assert validate_class(rr.config, P, 0.0).ok
    assert rr.V.contains_rect(Rect(3, 3, 9, 5))


def test_initial_rectangularization_identity_and_l_shape():
    cfg = config([rect_cells(3, 3, 5, 5), rect_cells(8, 8, 10, 11)])
    out = initial_rectangularization(cfg, P)
    assert [c.interior for c in out.components] == [c.interior for c in cfg.components]
    L = rect_cells(3, 3, 9, 4) + rect_cells(3, 4, 4, 10)
    cfg = config([L])
    out = initial_rectangularization(cfg, P)
    assert len(out) == 1 and out.components[0].interior == Rect(3, 3, 9, 10).gridset(SPEC)
    assert star_total(out, P) <= star_total(cfg, P)


@given(st.integers(0, 2**32 - 1))
def test_initial_rectangularization_soup(seed):
    rng = np.random.default_rng(seed)
    W = random_soup(rng, 32, 10)
    U = initial_rectangularization(W, P)
    assert validate_class(U, P, 0.0).ok
    assert star_total(U, P) <= star_total(W, P) * (1 + 1e-12)
    assert U.W().issubset(W.W())
    assert fill_holes(W).issubset(fill_holes(U))


def test_final_normalize_merges_touching():
    groups = [rect_cells(3, 3, 5, 5), rect_cells(5, 3, 6, 7)]
    cfg = config(groups)
    out = final_normalize(cfg, P)
    assert len(out) == 1
    assert out.components[0].interior == Rect(3, 3, 6, 7).gridset(SPEC)
    assert star_total(out, P) <= star_total(cfg, P)
    ident = config([rect_cells(3, 3, 5, 5)])
    assert final_normalize(ident, P).components[0].interior == ident.components[0].interior


@given(st.integers(34, 56), st.integers(0, 1), st.data())
def test_union_with_crossing_rectangle(vw, extra, data):
    # a short rectangle X crossing a long flat V, so its boundary outside V splits in two
    spec = LatticeSpec(1.0, 1.0 / 64)
    V = Rect(2, 10, 2 + vw, 11)
    x = data.draw(st.integers(V.x0, V.x1 - 1))
    X = Rect(x, 9 - extra, x + 1, 12)
    gX = X.boundary(spec)
    assert gX.diam_inf() <= V.diam() * spec.unit / 8
    U = GridSet(spec, V.mask(spec) | X.mask(spec)).boundary()
    lhs = measure_star(U.length(), U.diam_inf(), P)
    rhs = rect_star(V, spec, P) + 0.5 * (1 - P.h_star) * gX.diam_inf()
    assert lhs <= rhs * (1 + 1e-12)
