"""Finite certificates for N+ and for the inhomogeneity of each component of M+."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..clifford_system import LemmaViolation, product_operator
from ..exact_core import (
    DenseMatrix,
    ScaledVector,
    fraction_str,
    gram_matrix,
    independent_subset,
    kernel_basis,
    pseudo_inner,
    rank,
    signature_of_gram,
    vec_combination,
)
from .functions import is_numeric, m_plus_membership, raw_and_scale, shape_kernel, to_numpy
from .strata import (
    M1,
    M2,
    M3,
    WHOLE,
    classify_case,
    complement_vector,
    components_of_case,
    in_eigenspace,
    mixed_point,
    mixing_coefficient,
    positive_vector,
    sphere_point_in_eigenspace,
    stratum_of,
    unit_point,
)


class HypothesisUnmet(ValueError):
    """``l > m`` fails, so no inhomogeneity certificate is claimed."""


@dataclass
class NPlusVerdict:
    member: bool
    basis: list
    inertia: tuple

    def to_json(self) -> dict:
        neg, zero, pos = self.inertia
        return {"member": self.member, "kernel_dim": len(self.basis),
                "inertia": {"neg": neg, "zero": zero, "pos": pos}}


@dataclass
class WitnessRecord:
    kind: str
    component: str
    point: ScaledVector
    aux: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    verdict: NPlusVerdict | None = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        out = {"kind": self.kind, "component": self.component, "point": self.point.to_json(),
               "checks": dict(self.checks), "passed": self.passed}
        aux = {}
        for k, v in self.aux.items():
            if isinstance(v, ScaledVector):
                aux[k] = v.to_json()
            elif isinstance(v, Fraction):
                aux[k] = fraction_str(v)
            elif isinstance(v, tuple) and v and isinstance(v[0], (int, Fraction)):
                aux[k] = [fraction_str(a) for a in v]
            else:
                aux[k] = v
        out["aux"] = aux
        if self.verdict is not None:
            out["verdict"] = self.verdict.to_json()
        return out


# --------------------------------------------------------------------------- #
# N+ membership


def _intersect(system, current: list, other: list) -> list:
    """Exact basis of ``span(current) ∩ span(other)``."""
    if not current or not other:
        return []
    n = system.dim
    rows = [[c[r] for c in current] + [-o[r] for o in other] for r in range(n)]
    rows = [row for row in rows if any(row)]
    if not rows:
        return list(current)
    coeffs = kernel_basis(rows)
    k = len(current)
    vectors = [vec_combination(c[:k], current) for c in coeffs]
    vectors = [v for v in vectors if any(v)]
    keep = independent_subset(vectors)
    return [vectors[i] for i in keep]


def _numeric_intersection(spans: list) -> np.ndarray:
    basis = np.linalg.qr(spans[0].T)[0]
    for other in spans[1:]:
        ob = np.linalg.qr(other.T)[0]
        stacked = np.hstack([basis, -ob])
        _, sv, vt = np.linalg.svd(stacked)
        null = vt[np.sum(sv > 1e-9 * sv[0]):].T
        if null.size == 0:
            return np.zeros((basis.shape[0], 0))
        basis = np.linalg.qr(basis @ null[: basis.shape[1]])[0]
    return basis


def n_plus_membership(system, x) -> NPlusVerdict:
    """Decide whether ``∩_i ker S_{P_i x}`` contains a spacelike vector.

    The kernels come from the algebraic description of ``ker S_v``; the
    decision uses the exact inertia of the metric on the intersection.
    """
    if is_numeric(x):
        xs = x
        spans = [np.array([to_numpy(k) for k in shape_kernel(system, xs, system.apply(i, xs))])
                 for i in range(system.m)]
        basis = _numeric_intersection(spans)
        if basis.shape[1] == 0:
            return NPlusVerdict(False, [], (0, 0, 0))
        gm = basis.T @ (system.metric.diag_array[:, None] * basis)
        ev = np.linalg.eigvalsh(gm)
        tol = 1e-9
        inertia = (int(np.sum(ev < -tol)), int(np.sum(np.abs(ev) <= tol)), int(np.sum(ev > tol)))
        return NPlusVerdict(inertia[2] > 0, list(basis.T), inertia)
    u, s = raw_and_scale(x)
    point = ScaledVector(tuple(u), s) if not isinstance(x, ScaledVector) else x
    current = None
    for i in range(system.m):
        kern = [raw_and_scale(k)[0] for k in shape_kernel(system, point, system.apply(i, point))]
        current = kern if current is None else _intersect(system, current, kern)
        if not current:
            return NPlusVerdict(False, [], (0, 0, 0))
    inertia = signature_of_gram(gram_matrix(current, system.metric))
    return NPlusVerdict(inertia[2] > 0, current, inertia)


def _in_span(vectors: list, v) -> bool:
    if not vectors:
        return not any(v)
    return rank(DenseMatrix([list(w) for w in vectors] + [list(v)])) == rank(DenseMatrix([list(w) for w in vectors]))


# --------------------------------------------------------------------------- #
# joint eigenspaces of R_i = Q_{2i-1, 4}


def r_operators(system) -> list:
    return [product_operator(system, 2 * i - 1, 4) for i in range(1, (system.m - 2) // 2 + 1)]


def _restrict(basis: list, op, eps: int) -> list:
    vectors = []
    for v in basis:
        ov = op.apply(v)
        w = tuple(a + eps * b for a, b in zip(v, ov))
        if any(w):
            vectors.append(w)
    keep = independent_subset(vectors)
    return [vectors[i] for i in keep]


def joint_eigenspaces(system):
    """Yield ``(pattern, basis)`` for non-empty joint eigenspaces of the ``R_i``
    in lexicographic order of the sign pattern (``-1`` before ``+1``)."""
    ops = r_operators(system)
    n = system.dim
    start = [tuple(1 if k == j else 0 for k in range(n)) for j in range(n)]

    def walk(depth, basis, pattern):
        if depth == len(ops):
            yield tuple(pattern), basis
            return
        for eps in (-1, 1):
            sub = _restrict(basis, ops[depth], eps)
            if sub:
                yield from walk(depth + 1, sub, pattern + [eps])

    yield from walk(0, start, [])


def _component_for(system, component):
    comps = components_of_case(classify_case(system))
    if component is None:
        return comps[0], comps
    if component not in comps:
        raise ValueError(f"component {component!r} not among {comps}")
    return component, comps


def _stratum_eps(label: str) -> int:
    return 1 if label == M1 else -1


def n_plus_witness(system, component: str | None = None) -> WitnessRecord:
    """A point of N+ in ``component`` with a spacelike common kernel vector ``v = P_1 P_2 x``."""
    component, _ = _component_for(system, component)
    x = pattern = None
    for pattern, basis in joint_eigenspaces(system):
        u = positive_vector(basis, system.metric)
        if u is not None:
            x = unit_point(u, system.metric)
            break
    if x is None:
        raise LemmaViolation("no joint eigenspace of the R_i meets the sphere")
    eps = in_eigenspace(system, x)
    if eps == 0:
        raise LemmaViolation("joint eigenvector is not an eigenvector of P")
    moved = False
    if component != WHOLE and stratum_of(system, x) != component:
        x = system.apply(system.m - 1, x)
        moved = True
    v = system.apply(0, system.apply(1, x))
    v_norm2 = v.norm2(system.metric)
    verdict = n_plus_membership(system, x)
    checks = {
        "in_m_plus": m_plus_membership(system, x),
        "in_component": component == WHOLE or stratum_of(system, x) == component,
        "v_norm2_is_one": v_norm2 == 1,
        "v_in_kernel_intersection": _in_span(verdict.basis, v.vector),
        "in_n_plus": verdict.member,
        "in_eigenspace": in_eigenspace(system, x) != 0,
    }
    aux = {"pattern": list(pattern), "moved_by_P_m": moved, "v": v, "v_norm2": v_norm2}
    return WitnessRecord("n_plus_member", component, x, aux, checks, verdict)


def inhomogeneity_witness(system, component: str | None = None) -> WitnessRecord:
    """A point ``x + y`` of the component, off both eigenspaces and outside N+."""
    if system.l <= system.m:
        raise HypothesisUnmet(f"needs l > m, got l = {system.l}, m = {system.m}")
    case = classify_case(system)
    component, _ = _component_for(system, component)
    d_case = case.startswith("d")
    sign = 1 if d_case else -1
    candidates = (1, -1) if component == WHOLE else (_stratum_eps(component),)
    chosen = None
    for eps in candidates:
        xp = sphere_point_in_eigenspace(system, eps)
        if xp is None:
            continue
        w = complement_vector(system, xp.vector, eps, sign)
        if w is not None:
            chosen = eps, xp.vector, w
            break
    if chosen is None:
        raise LemmaViolation(f"no completion vector for case {case}, component {component}")
    eps, u, w = chosen
    g = system.metric
    a = Fraction(pseudo_inner(u, u, g))
    b = Fraction(abs(pseudo_inner(w, w, g)))
    if d_case:
        q, exact = mixing_coefficient(a / b)
        expected = M3
    else:
        q, exact = mixing_coefficient(a / (2 * b), upper=a / b)
        expected = M1 if eps == 1 else M2
    point = mixed_point(system, u, w, q)
    verdict = n_plus_membership(system, point)
    in_m_plus = m_plus_membership(system, point)
    checks = {
        "in_m_plus": in_m_plus,
        "stratum": in_m_plus and stratum_of(system, point) == expected,
        "not_in_eigenspaces": in_eigenspace(system, point) == 0,
        "not_in_n_plus": not verdict.member,
    }
    aux = {"eps": eps, "x_direction": tuple(u), "y_direction": tuple(w), "q": q,
           "expected_stratum": expected, "exact_ratio": exact}
    return WitnessRecord("inhomogeneity_point", component, point, aux, checks, verdict)


def replay(system, record: WitnessRecord) -> bool:
    """Recompute the verdict from the stored point; True iff it agrees."""
    verdict = n_plus_membership(system, record.point)
    return verdict.member == (record.kind == "n_plus_member")


def all_components(system) -> list:
    return components_of_case(classify_case(system))


__all__ = [
    "HypothesisUnmet",
    "NPlusVerdict",
    "WitnessRecord",
    "all_components",
    "inhomogeneity_witness",
    "joint_eigenspaces",
    "n_plus_membership",
    "n_plus_witness",
    "r_operators",
    "replay",
]
