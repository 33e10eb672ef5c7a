import random
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from clifford_forge import construct_clifford_system
from clifford_forge.clifford_system import basis_product_sign, change_basis, random_pseudo_orthogonal
from clifford_forge.exact_core import (
    DenseMatrix,
    Metric,
    SignedPermMatrix,
    as_dense,
    kernel_basis,
    pseudo_inner,
    rank,
    signature_of_gram,
)
from clifford_forge.focal_geometry.functions import eval_F, eval_H

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
SYSTEMS = {key: construct_clifford_system(*key) for key in [(4, 0), (4, 2), (4, 4)]}


def vectors(n):
    return st.lists(rationals, min_size=n, max_size=n).map(tuple)


@st.composite
def signed_perms(draw, n=5):
    image = draw(st.permutations(range(n)))
    sign = draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    return SignedPermMatrix(image, sign)


@given(vectors(5), vectors(5), vectors(5), rationals, st.integers(0, 5))
def test_pseudo_inner_bilinear_symmetric(u, v, w, a, neg):
    g = Metric(neg, 5 - neg)
    assert pseudo_inner(u, v, g) == pseudo_inner(v, u, g)
    lhs = pseudo_inner(tuple(a * x + y for x, y in zip(u, w)), v, g)
    assert lhs == a * pseudo_inner(u, v, g) + pseudo_inner(w, v, g)


@given(signed_perms(), signed_perms())
def test_signed_perm_fast_path_agrees(a, b):
    assert as_dense(a @ b) == as_dense(a) @ as_dense(b)
    assert isinstance(a @ b, SignedPermMatrix)


@settings(max_examples=40)
@given(st.lists(vectors(4), min_size=4, max_size=4), st.lists(vectors(4), min_size=4, max_size=4))
def test_sylvester_law(rows, srows):
    a = DenseMatrix(rows)
    g = a + a.T
    s = DenseMatrix(srows)
    if rank(s) < 4:
        s = s + DenseMatrix.identity(4).scale(100)
    if rank(s) < 4:
        return
    assert signature_of_gram(s.T @ g @ s) == signature_of_gram(g)


@settings(max_examples=40)
@given(st.lists(vectors(5), min_size=1, max_size=4))
def test_kernel_basis_exact(rows):
    m = DenseMatrix(rows)
    basis = kernel_basis(m)
    assert len(basis) == 5 - rank(m)
    for v in basis:
        assert all(x == 0 for x in m.apply(v))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(SYSTEMS)), st.integers(0, 10**6), st.data())
def test_H_depends_only_on_span(key, seed, data):
    system = SYSTEMS[key]
    x = data.draw(vectors(system.dim))
    a = random_pseudo_orthogonal(4, system.r, random.Random(seed), length=4)
    new = change_basis(system, a)
    assert eval_H(new, x) == eval_H(system, x)
    assert basis_product_sign(system, a) in (1, -1)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(SYSTEMS)), rationals, st.data())
def test_F_is_quartic(key, lam, data):
    system = SYSTEMS[key]
    x = data.draw(vectors(system.dim))
    assert eval_F(system, tuple(lam * a for a in x)) == lam**4 * eval_F(system, x)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sampling_seed_determinism(seed):
    from clifford_forge.focal_geometry.sampling import sample_m_plus

    a = sample_m_plus(SYSTEMS[(4, 2)], 2, seed)
    b = sample_m_plus(SYSTEMS[(4, 2)], 2, seed)
    assert all(np.array_equal(p, q) for p, q in zip(a.points, b.points))
