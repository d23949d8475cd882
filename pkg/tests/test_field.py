import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crackset.grid_sets import Configuration, EdgeSet, GridSet, InvalidInput, LatticeSpec, Rect, components_of
from crackset.field import (DiscreteField, RigidMotion, boundary_trace_norm, chained_rigid_fit, elastic_energy,
                            extend, field_from_function, field_from_nodal, fit_rigid_motion, generate_field,
                            jump_integral, l2_norm_sq, piecewise_field, rigid, rigid_difference, rigid_l2_sq,
                            rigid_ratio_rectangle, rigid_ratio_segment, split_inequality, strain_l1,
                            total_variation_E)

SPEC = LatticeSpec(1.0, 1.0 / 16)
GL_X, GL_W = np.polynomial.legendre.leggauss(4)
GL_X = (GL_X + 1) / 2
GL_W = GL_W / 2


def random_field(seed, spec=SPEC, jump_set=None):
    rng = np.random.default_rng(seed)
    return DiscreteField(spec, rng.normal(size=(spec.n, spec.n, 4, 2)), jump_set=jump_set)


def gl_energy(u, mask):
    """Integral of |e(u)|^2 from the corner values with 4x4 Gauss-Legendre per cell."""
    h = u.spec.unit
    tot = 0.0
    for i, j in np.argwhere(mask):
        c = u.values[i, j]
        for xi, wx in zip(GL_X, GL_W):
            for eta, wy in zip(GL_X, GL_W):
                dx = ((1 - eta) * (c[1] - c[0]) + eta * (c[3] - c[2])) / h
                dy = ((1 - xi) * (c[2] - c[0]) + xi * (c[3] - c[1])) / h
                G = np.stack([dx, dy], -1)
                E = (G + G.T) / 2
                tot += wx * wy * (E ** 2).sum() * h * h
    return tot


def test_energy_of_rigid_motion_is_zero():
    u = field_from_function(SPEC, rigid(0.7, (0.3, -1.2)))
    assert elastic_energy(u) < 1e-28
    assert strain_l1(u) < 1e-13


def test_energy_of_constant_strain():
    B = np.array([[0.3, -0.2], [-0.2, 0.5]])
    u = field_from_function(SPEC, lambda x, y: np.stack([B[0, 0] * x + B[0, 1] * y, B[1, 0] * x + B[1, 1] * y], -1))
    U = Rect(2, 3, 9, 7)
    area = U.width * U.height * SPEC.unit ** 2
    assert elastic_energy(u, U) == pytest.approx((B ** 2).sum() * area, rel=1e-13)


@given(st.integers(0, 2**32 - 1))
def test_energy_matches_refined_quadrature(seed):
    u = random_field(seed)
    mask = np.random.default_rng(seed + 1).random((16, 16)) < 0.3
    mask[3, 3] = True
    assert elastic_energy(u, mask) == pytest.approx(gl_energy(u, mask), rel=1e-10)


def two_cell_field(left, right, spec=SPEC):
    """Cells (5,5) and (6,5) with independent corner values, separated by a crack edge."""
    v = np.zeros((spec.n, spec.n, 4, 2))
    v[5, 5] = left
    v[6, 5] = right
    edge = EdgeSet.from_edges(spec, [("v", 6, 5)])
    return DiscreteField(spec, v, jump_set=edge), edge


def test_jump_integral_continuous_and_constant():
    c = np.array([0.3, -0.4])
    cont = np.tile([1.0, 2.0], (4, 1))
    u, e = two_cell_field(cont, cont)
    assert jump_integral(u, e) == 0.0
    u, e = two_cell_field(cont, cont + c)
    assert jump_integral(u, e) == pytest.approx((c ** 2).sum() * SPEC.unit)
    assert jump_integral(u, e, power=1) == pytest.approx(math.hypot(*c) * SPEC.unit)


def test_jump_integral_linear_against_quadrature():
    rng = np.random.default_rng(4)
    left, right = rng.normal(size=(4, 2)), rng.normal(size=(4, 2))
    u, e = two_cell_field(left, right)
    # on the shared edge the left cell uses corners 1,3 and the right cell corners 0,2
    a = right[0] - left[1]
    b = right[2] - left[3]
    L = SPEC.unit
    t = np.linspace(0, 1, 200001)
    vals = a[None] + (b - a)[None] * t[:, None]
    sq = np.trapezoid((vals ** 2).sum(-1), t) * L
    ab = np.trapezoid(np.sqrt((vals ** 2).sum(-1)), t) * L
    assert jump_integral(u, e, 2) == pytest.approx(sq, rel=1e-9)
    assert jump_integral(u, e, 1) == pytest.approx(ab, rel=1e-9)


def test_jump_integral_rejects_non_jump_edges():
    u = random_field(0)
    with pytest.raises(InvalidInput):
        jump_integral(u, EdgeSet.from_edges(SPEC, [("h", 3, 4)]))


def one_component_config():
    cells = [(i, j) for i in range(5, 9) for j in range(6, 9)]
    return components_of(GridSet.from_cells(SPEC, cells), SPEC, [cells])


def test_extend_empty_scope_and_zero_motion():
    cfg = one_component_config()
    u = generate_field(cfg, "smooth", seed=3, amplitude=0.5)
    assert np.array_equal(extend(u, cfg, {}, []).values, u.values)
    zero = RigidMotion(0.0, (0.0, 0.0))
    ub = extend(u, cfg, {0: zero}, [0])
    X = cfg.components[0].interior.mask
    assert not ub.values[X].any()
    g = cfg.components[0].gamma
    outside = ~X
    from crackset.field import trace_integral
    assert jump_integral(ub, g) == pytest.approx(trace_integral(u, g, outside), rel=1e-12)
    with pytest.raises(InvalidInput):
        extend(u, cfg, {}, [0])


@given(st.integers(0, 2**32 - 1))
def test_extension_energy_identity(seed):
    cfg = one_component_config()
    u = generate_field(cfg, "noise", seed=seed % 1000, amplitude=0.1)
    rng = np.random.default_rng(seed)
    m = RigidMotion(float(rng.normal()), tuple(rng.normal(size=2)))
    ub = extend(u, cfg, {0: m}, [0])
    X = cfg.components[0].interior.mask
    assert elastic_energy(ub, np.ones_like(X)) == pytest.approx(elastic_energy(u, ~X), rel=1e-12)


def test_fit_recovers_rigid_motion():
    u = field_from_function(SPEC, rigid(0.4, (1.0, -2.0)))
    fit = fit_rigid_motion(u, Rect(3, 3, 10, 8))
    assert fit["motion"].a == pytest.approx(0.4, rel=1e-12)
    assert fit["motion"].b == pytest.approx((1.0, -2.0), rel=1e-12)
    assert fit["residual"] < 1e-24


def test_fit_skew_part_on_centred_square():
    # square [-0.5, 0.5]^2 is cells 4..11 on the 16 lattice
    S = np.array([[0.3, 0.1], [0.1, -0.2]])
    a = 0.6
    u = field_from_function(SPEC, lambda x, y: np.stack([S[0, 0] * x + S[0, 1] * y + a * y,
                                                         S[1, 0] * x + S[1, 1] * y - a * x], -1))
    fit = fit_rigid_motion(u, Rect(4, 4, 12, 12))
    assert fit["motion"].a == pytest.approx(a, rel=1e-12)


def dense_fit(u, mask):
    """Least squares over a dense 6x6 Gauss-Legendre sample of every cell."""
    x6, w6 = np.polynomial.legendre.leggauss(6)
    x6, w6 = (x6 + 1) / 2, w6 / 2
    rows, rhs, wts = [], [], []
    h = u.spec.unit
    for i, j in np.argwhere(mask):
        c = u.values[i, j]
        for xi, wx in zip(x6, w6):
            for eta, wy in zip(x6, w6):
                val = (1 - xi) * (1 - eta) * c[0] + xi * (1 - eta) * c[1] + (1 - xi) * eta * c[2] + xi * eta * c[3]
                x, y = u.spec.to_phys(i + xi), u.spec.to_phys(j + eta)
                sw = math.sqrt(wx * wy) * h
                rows += [[y * sw, sw, 0.0], [-x * sw, 0.0, sw]]
                rhs += [val[0] * sw, val[1] * sw]
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return sol


def test_fit_matches_dense_oracle():
    u = random_field(12)
    mask = Rect(4, 5, 12, 13).mask(SPEC)
    fit = fit_rigid_motion(u, mask)["motion"]
    sol = dense_fit(u, mask)
    assert np.allclose([fit.a, *fit.b], sol, rtol=1e-8, atol=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_fit_residual_is_orthogonal_decomposition(seed):
    u = random_field(seed)
    fit = fit_rigid_motion(u, Rect(2, 2, 9, 7))
    assert fit["residual"] == pytest.approx(fit["norm_sq"] - fit["projection_sq"], rel=1e-10, abs=1e-12)
    # residual equals the L2 distance to the fitted motion
    resid_field = u.with_values(u.values - field_from_function(SPEC, fit["motion"]).values)
    assert l2_norm_sq(resid_field, Rect(2, 2, 9, 7)) == pytest.approx(fit["residual"], rel=1e-9)


def test_total_variation_examples():
    u = field_from_function(SPEC, rigid(0.2, (0.1, 0.3)))
    assert total_variation_E(u) == pytest.approx(0.0, abs=1e-13)
    cfg = one_component_config()
    u = generate_field(cfg, "piecewise_rigid", seed=5)
    J = cfg.crack_edges()
    assert total_variation_E(u) == pytest.approx(jump_integral(u, J, 1), rel=1e-10)


def test_total_variation_mixed_is_sum_of_parts():
    cfg = one_component_config()
    u = generate_field(cfg, "smooth", seed=2, amplitude=0.3)
    J = cfg.crack_edges()
    # independent strain L1 by 4x4 Gauss-Legendre
    h = SPEC.unit
    l1 = 0.0
    for i in range(16):
        for j in range(16):
            c = u.values[i, j]
            for xi, wx in zip(GL_X, GL_W):
                for eta, wy in zip(GL_X, GL_W):
                    dx = ((1 - eta) * (c[1] - c[0]) + eta * (c[3] - c[2])) / h
                    dy = ((1 - xi) * (c[2] - c[0]) + xi * (c[3] - c[1])) / h
                    G = np.stack([dx, dy], -1)
                    l1 += wx * wy * math.sqrt((((G + G.T) / 2) ** 2).sum()) * h * h
    everywhere = np.ones((16, 16), bool)
    total = total_variation_E(u)
    assert total == pytest.approx(strain_l1(u, everywhere) + jump_integral(u, J, 1), rel=1e-12)
    # |e(u)| is not polynomial, so the two quadratures differ slightly
    assert strain_l1(u, everywhere) == pytest.approx(l1, rel=1e-3)


@given(st.integers(0, 2**32 - 1))
def test_split_inequality(seed):
    cfg = one_component_config()
    u = generate_field(cfg, "noise", seed=seed % 997, amplitude=0.2)
    res = split_inequality(u)
    assert res["holds"]


def test_trace_norm_constant_field():
    c = np.array([0.5, -1.5])
    u = field_from_function(SPEC, lambda x, y: np.broadcast_to(c, np.shape(x) + (2,)))
    Q = Rect(0, 0, 16, 16)
    mu = 1.0
    res = boundary_trace_norm(u, Q, C=2.0)
    assert res["lhs"] == pytest.approx(8 * mu * (c ** 2).sum())
    assert res["rhs"] == pytest.approx(2.0 * 4 * mu * (c ** 2).sum())
    assert res["passes"]


def test_trace_norm_rigid_motion():
    m = RigidMotion(0.8, (0.2, 0.1))
    u = field_from_function(SPEC, m)
    Q = Rect(4, 4, 12, 12)
    res = boundary_trace_norm(u, Q)
    # closed form: integrate |a|^2 along the four sides of the physical square
    x0, x1 = SPEC.to_phys([4, 12])
    t = np.linspace(0, 1, 400001)
    lhs = 0.0
    for p0, p1 in [((x0, x0), (x1, x0)), ((x1, x0), (x1, x1)), ((x1, x1), (x0, x1)), ((x0, x1), (x0, x0))]:
        xs = p0[0] + (p1[0] - p0[0]) * t
        ys = p0[1] + (p1[1] - p0[1]) * t
        lhs += np.trapezoid((m(xs, ys) ** 2).sum(-1), t) * (x1 - x0)
    assert res["lhs"] == pytest.approx(lhs, rel=1e-9)
    # for rigid motions the ratio is at most 4, attained by rotations about the centre
    assert res["ratio"] <= 4 * (1 + 1e-9)
    assert boundary_trace_norm(u, Q, C=4.0)["passes"]
    x_c = SPEC.to_phys(8)
    spin = field_from_function(SPEC, RigidMotion(1.0, (-x_c, x_c)))
    assert boundary_trace_norm(spin, Q)["ratio"] == pytest.approx(4.0, rel=1e-9)


def test_trace_norm_jump_rectangle_dense_quadrature():
    cells = [(i, j) for i in range(6, 10) for j in range(6, 10)]
    cfg = components_of(GridSet.from_cells(SPEC, cells), SPEC, [cells])
    u = generate_field(cfg, "piecewise_rigid", seed=9)
    Q = Rect(4, 4, 12, 12)
    R = Rect(6, 6, 10, 10)
    res = boundary_trace_norm(u, Q, [R])
    # the jump term of the bound, by dense sampling of the two traces
    g = R.boundary(SPEC)
    jump = 0.0
    t = np.linspace(0, 1, 20001)
    for kind, i, j in g.edges:
        if kind == "h":
            p0, p1 = SPEC.to_phys([i, j]), SPEC.to_phys([i + 1, j])
            cm, cp = (i, j - 1), (i, j)
            ca, cb = ((2, 3), (0, 1))
        else:
            p0, p1 = SPEC.to_phys([i, j]), SPEC.to_phys([i, j + 1])
            cm, cp = (i - 1, j), (i, j)
            ca, cb = ((1, 3), (0, 2))
        lo = u.values[cm][list(ca)]
        hi = u.values[cp][list(cb)]
        d = (hi[0] - lo[0])[None] + ((hi[1] - lo[1]) - (hi[0] - lo[0]))[None] * t[:, None]
        jump += np.trapezoid((d ** 2).sum(-1), t) * SPEC.unit
    mu_q = Q.width * SPEC.unit / 2
    alpha = elastic_energy(u, Q.mask(SPEC))
    l2 = l2_norm_sq(u, Q.mask(SPEC))
    bracket = mu_q * alpha + l2 / mu_q + g.length() * jump / g.length()
    assert res["rhs"] == pytest.approx(2.0 * bracket, rel=1e-8)
    assert jump > mu_q * alpha


def test_chained_fit_rigid_and_l_path():
    u = field_from_function(SPEC, rigid(0.3, (1.0, 0.5)))
    path = [Rect(2 + 2 * k, 2, 4 + 2 * k, 4) for k in range(4)]
    assert chained_rigid_fit(u, path)["spread"] < 1e-12
    B = np.array([[0.2, 0.05], [0.05, -0.1]])
    u = field_from_function(SPEC, lambda x, y: np.stack([B[0, 0] * x + B[0, 1] * y, B[1, 0] * x + B[1, 1] * y], -1))
    path = [Rect(2 + 2 * k, 2, 4 + 2 * k, 4) for k in range(3)] + [Rect(6, 4 + 2 * k, 8, 6 + 2 * k) for k in range(3)]
    res = chained_rigid_fit(u, path)
    fits = res["motions"]
    # triangle inequality along the chain, square by square
    for Q in path:
        links = sum(math.sqrt(rigid_l2_sq(rigid_difference(fits[i], fits[i + 1]), Q, SPEC)) for i in range(5))
        for i1 in range(6):
            for i2 in range(i1 + 1, 6):
                assert math.sqrt(rigid_l2_sq(rigid_difference(fits[i1], fits[i2]), Q, SPEC)) <= links * (1 + 1e-12)
    half = path[0].width * SPEC.unit / 2
    assert res["spread"] <= res["measured_C"] * res["d"] / half * res["chain_sum"] * (1 + 1e-12)
    with pytest.raises(InvalidInput):
        chained_rigid_fit(u, [Rect(2, 2, 4, 4), Rect(8, 8, 10, 10)])


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 2), st.floats(0.05, 2))
def test_rectangle_rigid_ratios_closed_form(a, b1, b2, w, h):
    m = RigidMotion(a, (b1, b2))
    r = rigid_ratio_rectangle(m, -w / 2, -h / 2, w / 2, h / 2)
    # diam^2 |A|^2 <= 24 avg and sup <= 4 avg, both sharp
    assert r["grad"] <= 24 * (1 + 1e-9)
    assert r["sup"] <= 4 * (1 + 1e-9)


def test_rectangle_gradient_ratio_attains_24():
    r = rigid_ratio_rectangle(RigidMotion(1.0, (0.0, 0.0)), -1, -0.5, 1, 0.5)
    assert r["grad"] == pytest.approx(24.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1), st.floats(-1, 1),
       st.floats(-1, 1), st.floats(-1, 1))
def test_segment_ratio_at_most_48(a, b1, b2, x0, y0, x1, y1):
    if math.hypot(x1 - x0, y1 - y0) < 1e-3:
        return
    assert rigid_ratio_segment(RigidMotion(a, (b1, b2)), (x0, y0), (x1, y1)) <= 48
