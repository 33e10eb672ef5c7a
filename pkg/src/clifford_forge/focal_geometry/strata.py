"""Eigenspaces of ``P = P_1 ... P_m``, the case list, strata of M+ and
connectedness data."""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..clifford_system import LemmaViolation, full_product, orthogonalize_pseudo, rational_sqrt
from ..exact_core import (
    DenseMatrix,
    ScaledVector,
    SignedPermMatrix,
    as_dense,
    gram_matrix,
    independent_subset,
    kernel_basis,
    pseudo_inner,
    signature_of_gram,
    vec_combination,
)
from .functions import MEMBERSHIP_TOL, is_numeric, m_plus_membership, raw_and_scale, to_numpy

M1, M2, M3 = "M+,1", "M+,2", "M+,3"
WHOLE = "M+"
CASES = ("a", "b", "c1", "c2", "d1", "d2", "d3")


@dataclass(frozen=True)
class EigenSplit:
    plus: tuple
    minus: tuple
    s1: int
    s2: int
    product: object

    @property
    def dims(self) -> tuple:
        return len(self.plus), len(self.minus)

    def basis(self, eps: int) -> tuple:
        return self.plus if eps == 1 else self.minus

    def signature(self, eps: int) -> int:
        return self.s1 if eps == 1 else self.s2

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "s1": self.s1, "s2": self.s2}


_SPLITS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _signed_perm_eigenvectors(p: SignedPermMatrix) -> tuple:
    """Integer eigenbases of an involutive signed permutation."""
    n = p.order
    plus, minus = [], []
    for j in range(n):
        k, sg = p.image[j], p.sign[j]
        if k == j:
            (plus if sg == 1 else minus).append(tuple(1 if i == j else 0 for i in range(n)))
        elif j < k:
            up = [0] * n
            dn = [0] * n
            up[j] = dn[j] = 1
            up[k], dn[k] = sg, -sg
            plus.append(tuple(up))
            minus.append(tuple(dn))
    return plus, minus


def _dense_eigenvectors(p) -> tuple:
    dense = as_dense(p)
    ident = DenseMatrix.identity(dense.order)
    return kernel_basis(ident - dense), kernel_basis(ident + dense)


def eigensplit(system) -> EigenSplit:
    """Exact bases of ``E_+(P)``, ``E_-(P)`` and their indices ``(s1, s2)``.

    Certifies that both are ``l``-dimensional, mutually orthogonal and
    non-degenerate.
    """
    cached = _SPLITS.get(system)
    if cached is not None:
        return cached
    p = full_product(system)
    if isinstance(p, SignedPermMatrix):
        plus, minus = _signed_perm_eigenvectors(p)
    else:
        plus, minus = _dense_eigenvectors(p)
    g = system.metric
    if (len(plus), len(minus)) != (system.l, system.l):
        raise LemmaViolation(f"eigenspace dimensions {(len(plus), len(minus))} != ({system.l}, {system.l})")
    cross = gram_matrix(plus, g, minus)
    if any(a != 0 for row in cross.rows for a in row):
        raise LemmaViolation("E_+(P) and E_-(P) are not orthogonal")
    neg1, zero1, _ = signature_of_gram(gram_matrix(plus, g))
    neg2, zero2, _ = signature_of_gram(gram_matrix(minus, g))
    if zero1 or zero2:
        raise LemmaViolation("an eigenspace of P is degenerate")
    if neg1 + neg2 != system.s:
        raise LemmaViolation("s1 + s2 != s")
    out = EigenSplit(tuple(plus), tuple(minus), neg1, neg2, p)
    _SPLITS[system] = out
    return out


def classify_case(system) -> str:
    """Label from the seven-way case list, after checking the index bounds."""
    split = eigensplit(system)
    l, s, m, r = system.l, system.s, system.m, system.r
    s1, s2 = split.s1, split.s2
    if r < m and not (s % 2 == 0 and s1 == s2 == s // 2):
        raise LemmaViolation(f"expected s1 = s2 = s/2 for r < m, got ({s1}, {s2}), s = {s}")
    if r == 0:
        if not s // 2 <= l - m:
            raise LemmaViolation(f"s/2 = {s // 2} exceeds l - m = {l - m}")
        return "a" if s // 2 == l - m else "d1"
    if r < m:
        if not (s == l and m - r <= l // 2):
            raise LemmaViolation(f"m - r = {m - r} exceeds l/2 = {l // 2} (s = {s})")
        return "b" if m - r == l // 2 else "d2"
    if s1 + s2 != l:
        raise LemmaViolation("s1 + s2 != l for r = m")
    if (s1, s2) == (0, l):
        return "c1"
    if (s1, s2) == (l, 0):
        return "c2"
    if m <= s1 <= l - m and m <= s2 <= l - m:
        return "d3"
    raise LemmaViolation(f"(s1, s2) = ({s1}, {s2}) fits no case for r = m = {m}, l = {l}")


def components_of_case(case: str) -> list:
    if case in ("a", "b"):
        return [M1, M2]
    if case == "c1":
        return [M1]
    if case == "c2":
        return [M2]
    return [WHOLE]


def lemma_bounds_hold(system) -> bool:
    try:
        classify_case(system)
    except LemmaViolation:
        return False
    return True


# --------------------------------------------------------------------------- #
# projections and strata


def split_point(system, z) -> tuple:
    """``(z_+, z_-)`` with the same representation as ``z``."""
    p = eigensplit(system).product
    if is_numeric(z):
        pz = p.to_numpy() @ z
        return (z + pz) / 2, (z - pz) / 2
    u, s = raw_and_scale(z)
    pu = p.apply(u)
    up = tuple(Fraction(a + b, 2) for a, b in zip(u, pu))
    um = tuple(Fraction(a - b, 2) for a, b in zip(u, pu))
    if isinstance(z, ScaledVector):
        return ScaledVector(up, s) if any(up) else up, ScaledVector(um, s) if any(um) else um
    return up, um


def plus_norm2(system, z):
    """``<z_+, z_+>`` (exact for rational or scaled input)."""
    p = eigensplit(system).product
    if is_numeric(z):
        zp = (z + p.to_numpy() @ z) / 2
        return pseudo_inner(zp, zp, system.metric)
    u, s = raw_and_scale(z)
    pu = p.apply(u)
    up = tuple(a + b for a, b in zip(u, pu))
    return s * Fraction(pseudo_inner(up, up, system.metric), 4)


def stratum_of(system, z, tol: float = MEMBERSHIP_TOL) -> str:
    if not m_plus_membership(system, z, tol):
        raise ValueError("point is not in M+")
    val = plus_norm2(system, z)
    if is_numeric(z):
        if val >= 1 - tol:
            return M1
        if val <= tol:
            return M2
        return M3
    if val >= 1:
        return M1
    if val <= 0:
        return M2
    return M3


def in_eigenspace(system, z) -> int:
    """``+1``/``-1`` if ``P z = +-z`` exactly, else ``0``."""
    p = eigensplit(system).product
    u, _ = raw_and_scale(z)
    if is_numeric(u):
        pu = p.to_numpy() @ u
        tol = 1e-9 * max(1.0, float(np.max(np.abs(u))))
        if np.max(np.abs(pu - u)) < tol:
            return 1
        if np.max(np.abs(pu + u)) < tol:
            return -1
        return 0
    pu = p.apply(u)
    if all(a == b for a, b in zip(pu, u)):
        return 1
    if all(a == -b for a, b in zip(pu, u)):
        return -1
    return 0


# --------------------------------------------------------------------------- #
# exact points


def positive_vector(vectors, g):
    """A rational vector of positive norm in the span, or ``None``."""
    for v in vectors:
        if pseudo_inner(v, v, g) > 0:
            return v
    for w in orthogonalize_pseudo(vectors, g):
        if pseudo_inner(w, w, g) > 0:
            return w
    return None


def unit_point(u, g) -> ScaledVector:
    return ScaledVector(tuple(u), Fraction(1) / pseudo_inner(u, u, g))


def sphere_point_in_eigenspace(system, eps: int):
    """Exact point of ``E_eps(P) ∩ S``, or ``None`` when the intersection is empty."""
    split = eigensplit(system)
    if split.signature(eps) >= system.l:
        return None
    u = positive_vector(split.basis(eps), system.metric)
    if u is None:
        raise LemmaViolation("eigenspace has positive directions but none was found")
    return unit_point(u, system.metric)


def complement_vector(system, u, eps: int, sign: int):
    """Rational ``w`` in ``E_{-eps}(P)``, orthogonal to every ``P_j u``, with
    ``sign <w, w> > 0``; ``None`` if no such vector exists."""
    g = system.metric
    basis = eigensplit(system).basis(-eps)
    rows = [[pseudo_inner(b, system.apply(j, u), g) for b in basis] for j in range(system.m)]
    coeffs = kernel_basis(rows)
    if not coeffs:
        return None
    vectors = [vec_combination(c, basis) for c in coeffs]
    keep = independent_subset(vectors)
    vectors = [vectors[i] for i in keep]
    for v in vectors:
        if sign * pseudo_inner(v, v, g) > 0:
            return v
    for w in orthogonalize_pseudo(vectors, g):
        if sign * pseudo_inner(w, w, g) > 0:
            return w
    return None


def mixing_coefficient(target_q2: Fraction, upper: Fraction | None = None) -> tuple:
    """Rational ``q`` with ``q^2 = target_q2`` when possible.

    Otherwise the nearest small-denominator rational to the root, kept
    strictly below ``upper`` so the point stays in its stratum.  Returns
    ``(q, exact)``.
    """
    root = rational_sqrt(target_q2)
    if root is not None:
        return root, True
    q = Fraction(math.sqrt(target_q2)).limit_denominator(10**6)
    if q == 0:
        q = Fraction(1, 10**6)
    if upper is not None and q * q >= upper:
        q = Fraction(math.sqrt(float(upper)) * 0.999).limit_denominator(10**6)
    return q, False


def mixed_point(system, u, w, q) -> ScaledVector:
    """``(u + q w) / sqrt(<u + q w, u + q w>)``."""
    v = tuple(a + q * b for a, b in zip(u, w))
    n2 = pseudo_inner(v, v, system.metric)
    if n2 <= 0:
        raise ArithmeticError("mixed vector is not spacelike")
    return ScaledVector(v, Fraction(1) / n2)


def stratum_three_point(system):
    """Point of ``M+,3`` as ``x/sqrt2 + y/sqrt2`` with ``x, y`` unit points of
    opposite eigenspaces and ``y`` orthogonal to every ``P_j x``."""
    for eps in (1, -1):
        x = sphere_point_in_eigenspace(system, eps)
        if x is None:
            continue
        u = x.vector
        w = complement_vector(system, u, eps, 1)
        if w is None:
            continue
        a = pseudo_inner(u, u, system.metric)
        b = pseudo_inner(w, w, system.metric)
        q, exact = mixing_coefficient(Fraction(a) / b)
        return mixed_point(system, u, w, q), {"eps": eps, "exact_ratio": exact}
    return None, None


# --------------------------------------------------------------------------- #
# census and paths


def connectedness_census(system) -> dict:
    """Components from the case label and an exact witness per non-empty stratum."""
    case = classify_case(system)
    comps = components_of_case(case)
    strata = []
    plus_pt = sphere_point_in_eigenspace(system, 1)
    minus_pt = sphere_point_in_eigenspace(system, -1)
    if case in ("a", "b", "d1", "d2", "d3") and (plus_pt is None or minus_pt is None):
        raise LemmaViolation(f"case {case} needs sphere points in both eigenspaces")
    mixed = None
    if case.startswith("d"):
        mixed, _ = stratum_three_point(system)
        if mixed is None:
            raise LemmaViolation("case d promises a point of M+,3")
    for label, point in ((M1, plus_pt), (M2, minus_pt), (M3, mixed)):
        if point is None:
            strata.append({"label": label, "status": "empty_by_case", "case": case})
            continue
        got = stratum_of(system, point)
        if got != label:
            raise LemmaViolation(f"witness for {label} landed in {got}")
        strata.append({"label": label, "status": "witnessed", "witness_point": point})
    return {"case": case, "components": comps, "component_count": len(comps), "strata": strata}


@dataclass
class PathWitness:
    samples: list
    parameters: list
    x: np.ndarray
    y: np.ndarray
    t_z: float
    endpoint_residual: float
    orthogonality_residual: float
    all_in_m_plus: bool
    kind: str


def _orthogonality_residual(system, x, y) -> float:
    px = system.numeric_operators @ x
    return float(np.max(np.abs(px @ (system.metric.diag_array * y))))


def path_witness(system, z, count: int = 64) -> PathWitness:
    """Circular path ``cos(t) x + sin(t) y`` through ``z`` in M+,3."""
    if stratum_of(system, z) != M3:
        raise ValueError("path_witness needs a point of M+,3")
    zp, zm = split_point(system, to_numpy(z))
    g = system.metric
    ap, am = pseudo_inner(zp, zp, g), pseudo_inner(zm, zm, g)
    x, y = zp / math.sqrt(ap), zm / math.sqrt(am)
    t_z = math.atan2(math.sqrt(am), math.sqrt(ap))
    ts = list(np.linspace(0.0, math.pi / 2, count))
    pts = [math.cos(t) * x + math.sin(t) * y for t in ts]
    return PathWitness(
        samples=pts, parameters=ts, x=x, y=y, t_z=t_z,
        endpoint_residual=float(np.max(np.abs(math.cos(t_z) * x + math.sin(t_z) * y - to_numpy(z)))),
        orthogonality_residual=_orthogonality_residual(system, x, y),
        all_in_m_plus=all(m_plus_membership(system, p) for p in pts),
        kind="circular",
    )


def hyperbolic_path_witness(system, z, count: int = 64) -> PathWitness:
    """Path ``cosh(t) x + sinh(t) y`` from ``E_eps(P) ∩ S`` to ``z``.

    Applies when the eigen-component of ``z`` that carries the stratum has
    squared norm ``> 1`` (the other one is then timelike).
    """
    label = stratum_of(system, z)
    zp, zm = split_point(system, to_numpy(z))
    g = system.metric
    if label == M1:
        main, other = zp, zm
    elif label == M2:
        main, other = zm, zp
    else:
        raise ValueError("hyperbolic paths live in M+,1 or M+,2")
    a, b = pseudo_inner(main, main, g), pseudo_inner(other, other, g)
    if not (a > 1 and b < 0):
        raise ValueError("point is on the eigenspace itself or has no timelike part")
    x, y = main / math.sqrt(a), other / math.sqrt(-b)
    t_z = math.acosh(math.sqrt(a))
    ts = list(np.linspace(0.0, t_z, count))
    pts = [math.cosh(t) * x + math.sinh(t) * y for t in ts]
    return PathWitness(
        samples=pts, parameters=ts, x=x, y=y, t_z=t_z,
        endpoint_residual=float(np.max(np.abs(pts[-1] - to_numpy(z)))),
        orthogonality_residual=_orthogonality_residual(system, x, y),
        all_in_m_plus=all(m_plus_membership(system, p) for p in pts),
        kind="hyperbolic",
    )
