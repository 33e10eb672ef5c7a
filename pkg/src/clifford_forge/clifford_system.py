"""Clifford systems on pseudo-Euclidean space and their operator algebra."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Optional

import numpy as np

from .exact_core import (
    DenseMatrix,
    Metric,
    ScaledVector,
    SignedPermMatrix,
    as_dense,
    as_exact,
    gram_matrix,
    is_exact_value,
    is_pseudo_orthogonal,
    is_symmetric_wrt,
    matrices_equal,
    matrix_is_exact,
    normalize_entries,
    pseudo_inner,
    signature_of_gram,
    unit_vector,
    vec_combination,
)

REAL_TOL = 1e-9


class LemmaViolation(ArithmeticError):
    """An identity that must hold for every Clifford system failed.

    Raised only when arithmetic or construction is broken."""


class DegenerateSpan(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CliffordSystem:
    """``m`` operators on ``R^{2l}_s`` meant to satisfy the Clifford relations.

    Operators are :class:`SignedPermMatrix` for constructed systems and
    :class:`DenseMatrix` after a general basis change.  Construction does not
    validate the relations; use :func:`verify_system`.
    """

    operators: tuple
    metric: Metric
    m: int
    r: int
    d: Optional[int] = None
    trace: object = None

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("a Clifford system needs m >= 2")
        if len(self.operators) != self.m:
            raise ValueError(f"expected {self.m} operators, got {len(self.operators)}")
        if not 0 <= self.r <= self.m:
            raise ValueError(f"r = {self.r} outside [0, {self.m}]")
        if self.metric.dim % 2:
            raise ValueError("ambient dimension must be even")
        for op in self.operators:
            if op.shape != (self.metric.dim, self.metric.dim):
                raise ValueError("operator order does not match the ambient dimension")

    @property
    def l(self) -> int:  # noqa: E743
        return self.metric.dim // 2

    @property
    def s(self) -> int:
        return self.metric.neg

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def eta(self) -> Metric:
        return Metric(self.r, self.m - self.r)

    def eta_ii(self, i: int) -> int:
        return -1 if i < self.r else 1

    @cached_property
    def is_signed_perm(self) -> bool:
        return all(isinstance(p, SignedPermMatrix) for p in self.operators)

    @cached_property
    def is_exact(self) -> bool:
        return all(matrix_is_exact(p) for p in self.operators)

    @cached_property
    def numeric_operators(self) -> np.ndarray:
        return np.stack([p.to_numpy() for p in self.operators])

    def apply(self, i: int, x):
        """``P_{i+1} x`` (0-based index) for exact, scaled or float vectors."""
        if isinstance(x, np.ndarray):
            return self.numeric_operators[i] @ x
        return self.operators[i].apply(x)

    def inner(self, u, v):
        return pseudo_inner(u, v, self.metric)

    def header(self) -> dict:
        out = {"l": self.l, "s": self.s, "m": self.m, "r": self.r}
        if self.d is not None:
            out["d"] = self.d
        return out

    @cached_property
    def trace_gram(self) -> tuple:
        """``(2l)^{-1} trace(P_i P_j)`` computed from the operators themselves."""
        n = self.m
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                prod = self.operators[i] @ self.operators[j]
                val = prod.trace()
                val = Fraction(val, self.dim) if is_exact_value(val) else val / self.dim
                out[i][j] = out[j][i] = val
        return tuple(tuple(r) for r in out)


@dataclass(frozen=True, eq=False)
class SigmaElement:
    """``Q = sum_i c_i P_i`` in the span of a Clifford system."""

    system: CliffordSystem
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.system.m:
            raise ValueError("coefficient vector length must equal m")

    def apply(self, x):
        if isinstance(x, ScaledVector):
            return ScaledVector(self.apply(x.vector), x.scale2)
        if isinstance(x, np.ndarray):
            return np.tensordot(np.asarray(self.coeffs, dtype=float), self.system.numeric_operators, 1) @ x
        return vec_combination(self.coeffs, [self.system.apply(i, x) for i in range(self.system.m)])

    def matrix(self) -> DenseMatrix:
        dense = [as_dense(p) for p in self.system.operators]
        acc = dense[0].scale(self.coeffs[0])
        for c, p in zip(self.coeffs[1:], dense[1:]):
            acc = acc + p.scale(c)
        return acc


def sigma_element(system: CliffordSystem, coeffs) -> SigmaElement:
    return SigmaElement(system, tuple(coeffs))


def basis_element(system: CliffordSystem, i: int) -> SigmaElement:
    """``P_{i+1}`` as a Sigma element."""
    return SigmaElement(system, tuple(1 if k == i else 0 for k in range(system.m)))


def sigma_metric(q: SigmaElement, q2: SigmaElement):
    """``(2l)^{-1} trace(Q Q')``."""
    if q.system is not q2.system:
        raise ValueError("Sigma elements belong to different systems")
    t = q.system.trace_gram
    return sum(a * t[i][j] * b for i, a in enumerate(q.coeffs) for j, b in enumerate(q2.coeffs) if a and b)


# --------------------------------------------------------------------------- #
# verification


@dataclass
class Certificate:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    @property
    def first_failure(self) -> Optional[dict]:
        return next((c for c in self.checks if c["status"] != "pass"), None)

    @property
    def failed_check(self) -> Optional[str]:
        f = self.first_failure
        return f["check"] if f else None

    @property
    def counterexample(self):
        f = self.first_failure
        return f.get("counterexample") if f else None

    def add(self, check: str, ok: bool, counterexample=None) -> None:
        entry = {"check": check, "status": "pass" if ok else "fail"}
        if not ok and counterexample is not None:
            entry["counterexample"] = counterexample
        self.checks.append(entry)

    def to_json(self) -> dict:
        return {"status": "pass" if self.passed else "fail", "checks": list(self.checks)}


def _tol(system: CliffordSystem) -> float:
    return 0.0 if system.is_exact else REAL_TOL


def _anticommutator_ok(a, b, eta_ij: int, tol: float) -> bool:
    if isinstance(a, SignedPermMatrix) and isinstance(b, SignedPermMatrix):
        if a is b or a == b:
            sq = a @ a
            return eta_ij != 0 and sq == (SignedPermMatrix.identity(a.order) if eta_ij == 1 else -SignedPermMatrix.identity(a.order))
        return eta_ij == 0 and (a @ b) == -(b @ a)
    ab = as_dense(a) @ as_dense(b)
    ba = as_dense(b) @ as_dense(a)
    want = DenseMatrix.identity(ab.nrows).scale(2 * eta_ij)
    return (ab + ba).equals(want, tol)


def _random_rational(rng: random.Random, span: int = 5) -> Fraction:
    return Fraction(rng.randint(-span, span), rng.randint(1, span))


def verify_system(system: CliffordSystem, random_checks: int = 4, seed: int = 0) -> Certificate:
    """Exact certificate of the Clifford relations and derived identities.

    Checks, in order: ``P_i P_j + P_j P_i = 2 eta_ij I`` for all pairs;
    self-adjointness of each ``P_i``; the index constraint ``s = l`` when
    ``r > 0``; then, on random rational Sigma elements and probe vectors,
    ``(QQ' + Q'Q) x = 2 <Q, Q'> x`` and ``<Qx, Q'x> = <Q, Q'> <x, x>``.
    Failures are reported, not raised.
    """
    cert = Certificate()
    tol = _tol(system)
    ops = system.operators
    eta = system.eta.diag
    for i in range(system.m):
        for j in range(i, system.m):
            ok = _anticommutator_ok(ops[i], ops[j], eta[i] if i == j else 0, tol)
            if not ok:
                cert.add("clifford_relations", False, {"i": i + 1, "j": j + 1})
                return cert
    cert.add("clifford_relations", True)
    for i, p in enumerate(ops):
        if not is_symmetric_wrt(p, system.metric, tol):
            cert.add("symmetric_wrt_metric", False, {"i": i + 1})
            return cert
    cert.add("symmetric_wrt_metric", True)
    cert.add("index_constraint", system.r == 0 or system.s == system.l,
             {"s": system.s, "l": system.l} if system.r and system.s != system.l else None)
    if random_checks <= 0:
        return cert
    rng = random.Random(seed)
    exact = system.is_exact
    for trial in range(random_checks):
        c1 = tuple(_random_rational(rng) for _ in range(system.m))
        c2 = tuple(_random_rational(rng) for _ in range(system.m))
        q1, q2 = SigmaElement(system, c1), SigmaElement(system, c2)
        x = tuple(_random_rational(rng) for _ in range(system.dim))
        if not exact:
            x = np.array([float(a) for a in x])
        g12 = sigma_metric(q1, q2)
        lhs = _vadd(q1.apply(q2.apply(x)), q2.apply(q1.apply(x)))
        rhs = tuple(2 * g12 * a for a in x) if exact else 2 * g12 * x
        if not _vclose(lhs, rhs, tol):
            cert.add("sigma_anticommutator", False, {"trial": trial, "coeffs": [str(a) for a in c1 + c2]})
            return cert
        lhs2 = system.inner(q1.apply(x), q2.apply(x))
        rhs2 = g12 * system.inner(x, x)
        if not (lhs2 == rhs2 if exact else abs(lhs2 - rhs2) <= tol * max(1.0, abs(rhs2))):
            cert.add("sigma_isometry", False, {"trial": trial})
            return cert
    cert.add("sigma_anticommutator", True)
    cert.add("sigma_isometry", True)
    return cert


def _vadd(u, v):
    if isinstance(u, np.ndarray):
        return u + v
    return tuple(a + b for a, b in zip(u, v))


def _vclose(u, v, tol) -> bool:
    if isinstance(u, np.ndarray) or isinstance(v, np.ndarray):
        return bool(np.allclose(u, v, atol=tol, rtol=0))
    return all(a == b for a, b in zip(u, v))


# --------------------------------------------------------------------------- #
# basis change


def _as_square(a, m: int):
    if isinstance(a, (SignedPermMatrix, DenseMatrix)):
        out = a
    elif isinstance(a, np.ndarray):
        out = DenseMatrix(a.tolist()) if a.dtype != object else DenseMatrix(a.tolist())
    else:
        out = DenseMatrix(a)
    if out.shape != (m, m):
        raise ValueError(f"basis change must be {m}x{m}")
    return out


def change_basis(system: CliffordSystem, a) -> CliffordSystem:
    """``Q_k = sum_i P_i A_ik`` for ``A`` in ``O(r, m - r)``."""
    a = _as_square(a, system.m)
    exact = matrix_is_exact(a)
    if not is_pseudo_orthogonal(a, system.eta, 0.0 if exact else 1e-12):
        raise ValueError("basis change is not pseudo-orthogonal for eta")
    if isinstance(a, SignedPermMatrix) and system.is_signed_perm:
        ops = tuple(system.operators[a.image[k]] if a.sign[k] == 1 else -system.operators[a.image[k]]
                    for k in range(system.m))
    else:
        a = as_dense(a)
        dense = [as_dense(p) for p in system.operators]
        ops = []
        for k in range(system.m):
            acc = None
            for i in range(system.m):
                c = a.rows[i][k]
                if c == 0:
                    continue
                term = dense[i].scale(c)
                acc = term if acc is None else acc + term
            ops.append(acc)
        ops = tuple(ops)
    return CliffordSystem(ops, system.metric, system.m, system.r, system.d, None)


def sigma_columns(system: CliffordSystem, a) -> list:
    """Sigma elements ``Q_k = sum_i A_ik P_i`` without materialising matrices."""
    a = as_dense(_as_square(a, system.m))
    return [SigmaElement(system, tuple(a.rows[i][k] for i in range(system.m))) for k in range(system.m)]


# --------------------------------------------------------------------------- #
# product operators


def _check_parity(system: CliffordSystem) -> None:
    if system.m % 4 or system.r % 2:
        raise ValueError(f"needs m = 0 mod 4 and r even, got (m, r) = ({system.m}, {system.r})")


def _product(mats):
    acc = mats[0]
    for mat in mats[1:]:
        acc = acc @ mat
    return acc


def product_operator(system: CliffordSystem, q: int, p: int):
    """``Q_{q,p} = P_q P_{q+1} ... P_{q+p-1}`` (1-based ``q``), certified.

    Checks exactly that the reversed product agrees, that the result is
    self-adjoint and involutive, and that it anticommutes with each factor.
    """
    _check_parity(system)
    if q % 2 == 0 or q < 1 or p % 4 or p < 4 or q + p - 1 > system.m:
        raise ValueError(f"invalid (q, p) = ({q}, {p}) for m = {system.m}")
    tol = _tol(system)
    factors = list(system.operators[q - 1:q - 1 + p])
    if not system.is_signed_perm:
        factors = [as_dense(f) for f in factors]
    prod = _product(factors)
    if not matrices_equal(prod, _product(factors[::-1]), tol):
        raise LemmaViolation(f"Q_({q},{p}) differs from the reversed product")
    if not is_symmetric_wrt(prod, system.metric, tol):
        raise LemmaViolation(f"Q_({q},{p}) is not self-adjoint")
    n = system.dim
    ident = SignedPermMatrix.identity(n) if isinstance(prod, SignedPermMatrix) else DenseMatrix.identity(n)
    if not matrices_equal(prod @ prod, ident, tol):
        raise LemmaViolation(f"Q_({q},{p}) is not involutive")
    for a, pa in enumerate(factors, start=q):
        if not matrices_equal(pa @ prod, -(prod @ pa), tol):
            raise LemmaViolation(f"P_{a} does not anticommute with Q_({q},{p})")
    return prod


def full_product(system: CliffordSystem):
    """``P = P_1 P_2 ... P_m``, certified as above."""
    return product_operator(system, 1, system.m)


def basis_product_sign(system: CliffordSystem, a) -> int:
    """Sign ``e`` with ``Q_1 ... Q_m = e P`` for the basis ``[Q] = [P] A``.

    The product is evaluated column by column through exact operator actions.
    """
    _check_parity(system)
    qs = sigma_columns(system, a)
    prod = full_product(system)
    n = system.dim
    sign = None
    for j in range(n):
        x = unit_vector(n, j)
        for qk in reversed(qs):
            x = qk.apply(x)
        want = prod.apply(unit_vector(n, j))
        if all(u == w for u, w in zip(x, want)):
            col = 1
        elif all(u == -w for u, w in zip(x, want)):
            col = -1
        else:
            raise LemmaViolation("Q_1 ... Q_m is neither P nor -P")
        if sign is None:
            sign = col
        elif col != sign:
            raise LemmaViolation("Q_1 ... Q_m is neither P nor -P")
    return sign


# --------------------------------------------------------------------------- #
# generators of O(r, m - r)


@dataclass(frozen=True)
class Generator:
    """One generator: ``R`` (rotation in slots a, a+1), ``S`` (boost in
    slots 1, r+1), ``T1`` or ``T2``.  ``a`` is 1-based."""

    kind: str
    a: Optional[int] = None
    t: Optional[float] = None

    def matrix(self, m: int, r: int) -> np.ndarray:
        out = np.eye(m)
        if self.kind == "R":
            i = self.a - 1
            c, s = math.cos(self.t), math.sin(self.t)
            out[i, i] = out[i + 1, i + 1] = c
            out[i, i + 1], out[i + 1, i] = -s, s
        elif self.kind == "S":
            ch, sh = math.cosh(self.t), math.sinh(self.t)
            out[0, 0] = out[r, r] = ch
            out[0, r] = out[r, 0] = sh
        elif self.kind == "T1":
            out[r - 1, r - 1] = -1
        elif self.kind == "T2":
            out[m - 1, m - 1] = -1
        else:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        return out

    def inverse(self) -> "Generator":
        if self.kind in ("R", "S"):
            return Generator(self.kind, self.a, -self.t)
        return self

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.a is not None:
            out["a"] = self.a
        if self.t is not None:
            out["t"] = self.t
        return out


def rotation(m: int, a: int, cos, sin) -> DenseMatrix:
    """``R_{a,a+1}`` with given cosine/sine (exact when rational)."""
    rows = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    i = a - 1
    rows[i][i] = rows[i + 1][i + 1] = cos
    rows[i][i + 1], rows[i + 1][i] = -sin, sin
    return DenseMatrix(rows)


def boost(m: int, r: int, cosh, sinh, slot: int = 1) -> DenseMatrix:
    """Hyperbolic rotation in slots ``slot`` and ``r + 1`` (1-based)."""
    rows = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    i = slot - 1
    rows[i][i] = rows[r][r] = cosh
    rows[i][r] = rows[r][i] = sinh
    return DenseMatrix(rows)


def t1(m: int, r: int) -> SignedPermMatrix:
    if r < 1:
        raise ValueError("T1 needs r >= 1")
    return SignedPermMatrix(range(m), [-1 if i == r - 1 else 1 for i in range(m)])


def t2(m: int, r: int) -> SignedPermMatrix:
    if r >= m:
        raise ValueError("T2 needs r < m")
    return SignedPermMatrix(range(m), [-1 if i == m - 1 else 1 for i in range(m)])


def pythagorean(u: Fraction) -> tuple:
    """Rational ``(cos, sin)`` on the unit circle."""
    return (1 - u * u) / (1 + u * u), 2 * u / (1 + u * u)


def rational_hyperbolic(u: Fraction) -> tuple:
    """Rational ``(cosh, sinh)`` with ``cosh^2 - sinh^2 = 1`` for ``|u| < 1``."""
    if abs(u) >= 1:
        raise ValueError("|u| must be < 1")
    return (1 + u * u) / (1 - u * u), 2 * u / (1 - u * u)


def random_pseudo_orthogonal(m: int, r: int, rng: random.Random, length: int = 4) -> DenseMatrix:
    """Exact random element of ``O(r, m - r)`` as a product of generators."""
    acc = DenseMatrix.identity(m)
    slots = [a for a in range(1, m) if a != r]
    for _ in range(length):
        kinds = ["R"] if slots else []
        if 0 < r < m:
            kinds.append("S")
        if r >= 1:
            kinds.append("T1")
        if r < m:
            kinds.append("T2")
        kind = rng.choice(kinds)
        if kind == "R":
            c, s = pythagorean(Fraction(rng.randint(-4, 4), rng.randint(1, 5)))
            g = rotation(m, rng.choice(slots), c, s)
        elif kind == "S":
            u = Fraction(rng.randint(-3, 3), rng.randint(4, 6))
            ch, sh = rational_hyperbolic(u)
            g = boost(m, r, ch, sh)
        else:
            g = as_dense(t1(m, r) if kind == "T1" else t2(m, r))
        acc = acc @ g
    return acc


_TINY = 1e-15


def decompose_pseudo_orthogonal(a, eta: Metric) -> list:
    """Factor a real pseudo-orthogonal matrix into rotations, boosts, T1, T2.

    Left-multiplies by Givens rotations inside each sign block and by boosts
    across the blocks until the matrix becomes the identity; boosts between
    slots ``j`` and ``r+1`` with ``j > 1`` are conjugated to the single
    allowed boost by quarter rotations.  Sign residue is pushed to the last
    slot of each block and removed with ``T1``/``T2``.  Returns generators
    whose product, in order, reproduces ``a``.
    """
    a = np.array(a.to_numpy() if hasattr(a, "to_numpy") else a, dtype=float)
    m, r = eta.dim, eta.neg
    if a.shape != (m, m):
        raise ValueError("shape does not match eta")
    j_diag = np.array(eta.diag, dtype=float)
    residual = np.abs(a.T @ (j_diag[:, None] * a) * j_diag[None, :] - np.eye(m)).max()
    if residual > 1e-9:
        raise ValueError(f"matrix is not pseudo-orthogonal (residual {residual:.2e})")
    work = a.copy()
    applied = []

    def left(g: Generator):
        nonlocal work
        work = g.matrix(m, r) @ work
        applied.append(g)

    def givens(col: int, lo: int, hi: int):
        # concentrate rows lo..hi of column col into row lo
        for k in range(hi - 1, lo - 1, -1):
            u, w = work[k, col], work[k + 1, col]
            if abs(w) > _TINY:
                left(Generator("R", k + 1, math.atan2(-w, u)))

    def boost_to(j: int, col: int):
        u, w = work[j, col], work[r, col]
        if abs(w) <= _TINY:
            return
        ratio = -w / u
        if abs(ratio) >= 1:
            raise ArithmeticError("hyperbolic pivot is not timelike-dominant")
        t = math.atanh(ratio)
        for k in range(j, 0, -1):
            left(Generator("R", k, -math.pi / 2))
        left(Generator("S", None, t))
        for k in range(1, j + 1):
            left(Generator("R", k, math.pi / 2))

    for j in range(r):
        if r < m:
            givens(j, r, m - 1)
        givens(j, j, r - 1)
        if r < m:
            boost_to(j, j)
    for j in range(r, m):
        givens(j, j, m - 1)
    for lo, hi, last in ((0, r - 1, "T1"), (r, m - 1, "T2")):
        if hi < lo:
            continue
        for k in range(lo, hi):
            if work[k, k] < 0:
                left(Generator("R", k + 1, math.pi))
        if work[hi, hi] < 0:
            left(Generator(last))
    if np.abs(work - np.eye(m)).max() > 1e-8:
        raise ArithmeticError("decomposition did not converge to the identity")
    return [g.inverse() for g in applied]


def compose_generators(gens, m: int, r: int) -> np.ndarray:
    out = np.eye(m)
    for g in gens:
        out = out @ g.matrix(m, r)
    return out


# --------------------------------------------------------------------------- #
# generalized Gram-Schmidt


def orthogonalize_pseudo(vectors, g: Metric) -> list:
    """Mutually orthogonal, non-null vectors spanning the same subspace.

    Exact input stays exact (no normalisation).  A null vector after
    projection is swapped with the later vector of largest ``|<w, w>|``; if
    every remaining vector is null, the current one is replaced by its sum
    with a later vector it pairs with nontrivially.
    """
    vectors = [v for v in vectors]
    if not vectors:
        return []
    floating = any(isinstance(v, np.ndarray) for v in vectors)
    if floating:
        vectors = [np.asarray(v, dtype=float) for v in vectors]
        gm = np.array([[pseudo_inner(u, w, g) for w in vectors] for u in vectors])
        ev = np.linalg.eigvalsh(gm)
        if np.min(np.abs(ev)) <= 1e-12 * max(1.0, np.max(np.abs(ev))):
            raise DegenerateSpan("vectors span a degenerate (or dependent) subspace")
        tol = 1e-12 * max(1.0, np.max(np.abs(ev)))
    else:
        vectors = [tuple(as_exact(a) for a in v) for v in vectors]
        neg, zero, pos = signature_of_gram(gram_matrix(vectors, g))
        if zero:
            raise DegenerateSpan("vectors span a degenerate (or dependent) subspace")
        tol = 0

    def project(v, basis):
        for u, uu in basis:
            c = pseudo_inner(v, u, g) / uu
            if floating:
                v = v - c * u
            elif c:
                v = tuple(a - c * b for a, b in zip(v, u))
        return v

    def null(x) -> bool:
        return abs(x) <= tol if floating else x == 0

    out = []
    pending = list(vectors)
    while pending:
        projected = [project(v, out) for v in pending]
        norms = [pseudo_inner(w, w, g) for w in projected]
        k = 0
        if null(norms[0]):
            best = max(range(len(projected)), key=lambda i: abs(norms[i]))
            if not null(norms[best]):
                k = best
            else:
                partner = next((i for i in range(1, len(projected))
                                if not null(pseudo_inner(projected[0], projected[i], g))), None)
                if partner is None:
                    raise DegenerateSpan("null vector with no admissible pivot")
                w = projected[0] + projected[partner] if floating else \
                    tuple(a + b for a, b in zip(projected[0], projected[partner]))
                projected[0] = w
                norms[0] = pseudo_inner(w, w, g)
        w = projected[k]
        out.append((w, norms[k]))
        pending = [v for i, v in enumerate(pending) if i != k]
    if floating:
        return [w for w, _ in out]
    return [normalize_entries(w) for w, _ in out]


def gram_schmidt_pseudo(vectors, g: Metric) -> list:
    """Pseudo-orthonormal basis of the span of ``vectors``.

    Exact input yields :class:`ScaledVector` results whose Gram matrix is
    exactly diagonal with entries ``+-1``; float input yields arrays.
    """
    ortho = orthogonalize_pseudo(vectors, g)
    out = []
    for w in ortho:
        n2 = pseudo_inner(w, w, g)
        if isinstance(w, np.ndarray):
            out.append(w / math.sqrt(abs(n2)))
        else:
            out.append(ScaledVector(w, 1 / abs(as_exact(n2))))
    return out


def scaled_inner(u: ScaledVector, v: ScaledVector, g: Metric):
    """``<u, v>`` for scaled vectors when the product of scales is a square."""
    raw = pseudo_inner(u.vector, v.vector, g)
    if raw == 0:
        return Fraction(0)
    if u.scale2 == v.scale2:
        return u.scale2 * raw
    prod = u.scale2 * v.scale2
    root = _rational_sqrt(prod)
    if root is None:
        raise ValueError("inner product is irrational")
    return root * raw


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    q = as_exact(q)
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


rational_sqrt = _rational_sqrt
