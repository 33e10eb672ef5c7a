import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from clifford_forge import construct_clifford_system
from clifford_forge.clifford_system import full_product
from clifford_forge.exact_core import DenseMatrix, Metric, ScaledVector, pseudo_inner, rank
from clifford_forge.focal_geometry import functions as fg
from clifford_forge.focal_geometry.oracles import (
    newton_project,
    second_fundamental_pairing,
    shape_annihilation_residual,
    tangent_basis,
)
from clifford_forge.focal_geometry.sampling import child_generators, sample_m_plus, sample_normal
from clifford_forge.focal_geometry.strata import (
    M1,
    M2,
    M3,
    classify_case,
    components_of_case,
    connectedness_census,
    eigensplit,
    hyperbolic_path_witness,
    lemma_bounds_hold,
    path_witness,
    sphere_point_in_eigenspace,
    stratum_of,
    stratum_three_point,
)

CASE_TABLE = [
    # (m, r, d, l, s, s1, s2, case)
    (4, 0, 1, 8, 8, 4, 4, "a"),
    (4, 4, 1, 8, 8, 4, 4, "d3"),
    (4, 2, 1, 4, 4, 2, 2, "b"),
    (4, 0, 2, 16, 16, 8, 8, "d1"),
    (4, 2, 2, 8, 8, 4, 4, "d2"),
    (4, 4, 2, 16, 16, 8, 8, "d3"),
    (8, 0, 1, 64, 64, 32, 32, "d1"),
    (8, 2, 1, 32, 32, 16, 16, "d2"),
    (8, 4, 1, 16, 16, 8, 8, "d2"),
    (8, 6, 1, 32, 32, 16, 16, "d2"),
    (8, 8, 1, 64, 64, 32, 32, "d3"),
]


def _rational_point(n, seed):
    rng = np.random.default_rng(seed)
    return tuple(Fraction(int(a), int(b)) for a, b in zip(rng.integers(-6, 7, n), rng.integers(1, 5, n)))


# ---------------------------------------------------------------- values


def test_H_zero_at_origin_and_on_m_plus(sys40):
    assert fg.eval_H(sys40, (0,) * 16) == 0
    x = sphere_point_in_eigenspace(sys40, 1)
    assert fg.eval_H(sys40, x) == 0
    assert fg.eval_f(sys40, x) == 1


def test_F_quartic_homogeneity(sys40, sys44):
    for system in (sys40, sys44):
        x = _rational_point(16, 1)
        lam = Fraction(2)
        assert fg.eval_F(system, tuple(lam * a for a in x)) == 16 * fg.eval_F(system, x)


def test_eval_f_rejects_off_sphere(sys40):
    with pytest.raises(fg.OffSphere):
        fg.eval_f(sys40, np.ones(16))


def test_grad_F_matches_symbolic_derivative(sys40, sys42):
    for system in (sys40, sys42):
        n = system.dim
        xs = sympy.symbols(f"x0:{n}")
        J = sympy.diag(*system.metric.diag)
        X = sympy.Matrix(xs)
        norm2 = (X.T * J * X)[0]
        H = 0
        for i, p in enumerate(system.operators):
            P = sympy.Matrix(p.to_numpy().astype(int))
            H += system.eta_ii(i) * ((P * X).T * J * X)[0] ** 2
        F = sympy.expand(norm2**2 - 2 * H)
        grad = [sympy.diff(F, v) for v in xs]
        pt = np.random.default_rng(4).standard_normal(n)
        subs = dict(zip(xs, pt.tolist()))
        want = np.array([float(g.subs(subs)) for g in grad])
        assert np.allclose(fg.grad_F(system, pt), want, rtol=1e-10, atol=1e-10)


def test_grad_f_small_on_m_plus_and_nonzero_on_level(sys40):
    x = sample_m_plus(sys40, 1, seed=0).points[0]
    assert np.linalg.norm(fg.grad_f_numeric(sys40, x)) < 1e-5
    v = sample_normal(sys40, x, 1, np.random.default_rng(1))
    y = fg.focal_map_phi(sys40, x, v, 0.3)
    g = fg.grad_f_numeric(sys40, y)
    assert abs(pseudo_inner(g, g, sys40.metric)) > 1e-3


# ------------------------------------------------------------ membership


def test_membership_examples(sys40, sys44):
    assert fg.m_plus_membership(sys40, sphere_point_in_eigenspace(sys40, 1))
    e9 = tuple(1 if k == 8 else 0 for k in range(16))
    forms = [pseudo_inner(sys40.apply(j, e9), e9, sys40.metric) for j in range(4)]
    assert forms == [0, 0, 1, 0]
    assert not fg.m_plus_membership(sys40, e9)
    z, _ = stratum_three_point(sys44)
    assert fg.m_plus_membership(sys44, z)


# -------------------------------------------------------------- geodesics


def test_geodesic_cases():
    g = Metric(1, 2)
    x = np.array([0.0, 1.0, 0.0])
    v = np.array([1.0, 0.0, 1.0])  # null
    assert np.allclose(fg.geodesic(x, v, 0.7, 1.0, g), x + 0.7 * v)
    w = np.array([0.0, 0.0, 1.0])
    assert np.allclose(fg.geodesic(x, w, 0.0, 1.0, g), x)
    assert np.allclose(fg.geodesic(x, w, math.pi / 2, 1.0, g), w)


# ---------------------------------------------------------------- normals


def test_solve_Q_v(sys40):
    x = sample_m_plus(sys40, 1, seed=3).points[0]
    q = fg.solve_Q_v(sys40, x, sys40.apply(0, x))
    assert np.allclose(q.coeffs, [1, 0, 0, 0], atol=1e-12)
    v = (sys40.apply(0, x) + sys40.apply(1, x)) / math.sqrt(2)
    q = fg.solve_Q_v(sys40, x, v)
    assert np.allclose(q.coeffs, [2**-0.5, 2**-0.5, 0, 0], atol=1e-12)
    assert np.allclose(q.apply(x), v)
    tangent = tangent_basis(sys40, x)[:, 0]
    with pytest.raises(fg.NotNormal):
        fg.solve_Q_v(sys40, x, tangent)


def test_focal_map_levels(sys40, sys44):
    x = sample_m_plus(sys40, 1, seed=5).points[0]
    v = sample_normal(sys40, x, 1, np.random.default_rng(2))
    y = fg.focal_map_phi(sys40, x, v, 0.0)
    assert abs(fg.eval_f(sys40, y)) < 1e-9
    x = sample_m_plus(sys44, 1, seed=5).points[0]
    v = sample_normal(sys44, x, -1, np.random.default_rng(2))
    c = math.cosh(4.0)
    assert fg.t_of_level(c) == pytest.approx(1.0)
    y = fg.focal_map_phi(sys44, x, v, c)
    assert fg.eval_f(sys44, y) == pytest.approx(c, rel=1e-10)
    with pytest.raises(fg.OutsideWRN):
        fg.focal_map_phi(sys40, x, v, 2.0)


def test_velocity_is_minus_unit_normal(sys40, sys44):
    for system, c, delta in ((sys40, 0.2, 1), (sys44, 3.0, -1)):
        pts = sample_m_plus(system, 20, seed=9).points
        for k, x in enumerate(pts):
            v = sample_normal(system, x, delta, np.random.default_rng(k))
            y = fg.focal_map_phi(system, x, v, c)
            xi = fg.unit_normal_xi(system, y, c)
            assert np.linalg.norm(fg.focal_map_velocity(system, x, v, c) + xi) < 1e-8
            assert pseudo_inner(xi, xi, system.metric) == pytest.approx(delta)


def test_w_rn_intervals():
    assert fg.w_rn_interval(0, 4).label() == "(-1, 1)"
    assert fg.w_rn_interval(4, 4).label() == "(1, inf)"
    iv = fg.w_rn_interval(2, 8)
    assert iv.excludes_one and not iv.contains(1.0) and iv.contains(5.0) and iv.contains(0.0)


# ------------------------------------------------------------ shape kernel


def test_shape_kernel_for_p1(sys40):
    x = sphere_point_in_eigenspace(sys40, 1)
    v = sys40.apply(0, x)
    kern = fg.shape_kernel(sys40, x, v)
    expected = [sys40.apply(j, sys40.apply(0, x.vector)) for j in (1, 2, 3)]
    got = [k.vector for k in kern]
    assert rank(DenseMatrix([list(a) for a in got])) == 3
    assert rank(DenseMatrix([list(a) for a in got + expected])) == 3


def test_shape_kernel_annihilated_by_oracle(sys40, sys44):
    for system, delta in ((sys40, 1), (sys44, -1)):
        pts = sample_m_plus(system, 20, seed=21).points
        for k, x in enumerate(pts):
            v = sample_normal(system, x, delta, np.random.default_rng(100 + k))
            kern = fg.shape_kernel(system, x, v)
            assert shape_annihilation_residual(system, x, v, kern) < 1e-5


def test_shape_oracle_detects_non_kernel_vectors(sys40):
    x = sample_m_plus(sys40, 1, seed=2).points[0]
    v = sample_normal(sys40, x, 1, np.random.default_rng(0))
    tangent = tangent_basis(sys40, x)
    kern = np.array([np.asarray(k) for k in fg.shape_kernel(sys40, x, v)])
    # a tangent vector orthogonal (Euclidean) to the kernel
    proj = tangent - kern.T @ np.linalg.lstsq(kern.T, tangent, rcond=None)[0]
    idx = int(np.argmax(np.linalg.norm(proj, axis=0)))
    w = proj[:, idx] / np.linalg.norm(proj[:, idx])
    assert shape_annihilation_residual(sys40, x, v, [w]) > 1e-3


def test_second_fundamental_pairing_symmetric(sys40):
    x = sample_m_plus(sys40, 1, seed=8).points[0]
    v = sys40.apply(1, x)
    t = tangent_basis(sys40, x)
    a, b = t[:, 0], t[:, 1]
    p = second_fundamental_pairing(sys40, x, v, a + b)
    q = second_fundamental_pairing(sys40, x, v, a - b)
    p2 = second_fundamental_pairing(sys40, x, v, b + a)
    assert p == pytest.approx(p2)
    assert np.isfinite(q)


# -------------------------------------------------------- cases and strata


@pytest.mark.parametrize("m,r,d,l,s,s1,s2,case", CASE_TABLE)
def test_case_table(m, r, d, l, s, s1, s2, case):
    system = construct_clifford_system(m, r, d)
    split = eigensplit(system)
    assert (system.l, system.s) == (l, s)
    assert split.dims == (l, l)
    assert (split.s1, split.s2) == (s1, s2)
    assert classify_case(system) == case
    assert lemma_bounds_hold(system)


def test_components_of_case():
    assert components_of_case("a") == [M1, M2]
    assert components_of_case("c1") == [M1]
    assert components_of_case("c2") == [M2]
    assert components_of_case("d2") == ["M+"]


def test_strata_of_exact_points(sys40, sys44):
    for system in (sys40, sys44):
        assert stratum_of(system, sphere_point_in_eigenspace(system, 1)) == M1
        assert stratum_of(system, sphere_point_in_eigenspace(system, -1)) == M2
    z, _ = stratum_three_point(sys44)
    assert stratum_of(sys44, z) == M3
    assert stratum_three_point(sys40) == (None, None)


def test_census(sys40, sys44):
    c = connectedness_census(sys40)
    assert c["component_count"] == 2
    assert [s["status"] for s in c["strata"]] == ["witnessed", "witnessed", "empty_by_case"]
    c = connectedness_census(sys44)
    assert c["component_count"] == 1
    assert [s["status"] for s in c["strata"]] == ["witnessed"] * 3


def test_path_witnesses(sys44, sys40):
    z, _ = stratum_three_point(sys44)
    w = path_witness(sys44, z)
    assert w.all_in_m_plus and w.endpoint_residual < 1e-12 and w.orthogonality_residual < 1e-12
    pts = [p for p in sample_m_plus(sys40, 20, seed=1).points if stratum_of(sys40, p) == M1]
    hw = hyperbolic_path_witness(sys40, pts[0])
    assert hw.all_in_m_plus and hw.endpoint_residual < 1e-9


# --------------------------------------------------------------- sampling


def test_sampling_deterministic(sys40):
    a = sample_m_plus(sys40, 5, seed=42)
    b = sample_m_plus(sys40, 5, seed=42)
    assert all(np.array_equal(p, q) for p, q in zip(a.points, b.points))
    assert all(fg.m_plus_membership(sys40, p) for p in a.points)
    assert sum(a.strata.values()) == 5


def test_newton_projection_lands_on_m_plus(sys44):
    rng = child_generators(0, 1)[0]
    y = rng.standard_normal(16)
    y /= math.sqrt(abs(pseudo_inner(y, y, sys44.metric)))
    x = newton_project(sys44, y)
    assert fg.m_plus_membership(sys44, x)


def test_eigenspace_points_satisfy_P(sys40):
    p = full_product(sys40)
    x = sphere_point_in_eigenspace(sys40, -1)
    assert isinstance(x, ScaledVector)
    assert p.apply(x.vector) == tuple(-a for a in x.vector)
