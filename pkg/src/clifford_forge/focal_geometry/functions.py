"""The isoparametric function, its level sets, geodesics and normal data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..clifford_system import CliffordSystem, SigmaElement, sigma_metric
from ..exact_core import (
    DenseMatrix,
    Metric,
    ScaledVector,
    kernel_basis,
    pseudo_inner,
    rank,
)

MEMBERSHIP_TOL = 1e-10
NORMAL_TOL = 1e-9


class OffSphere(ValueError):
    pass


class NotNormal(ValueError):
    """Vector is not in ``span{P_i x}``."""


class OutsideWRN(ValueError):
    """Level ``c`` outside ``W_RN(f) ∩ (-1, inf)`` for this signature."""


class NullNormal(ValueError):
    pass


# --------------------------------------------------------------------------- #
# point plumbing


def is_numeric(x) -> bool:
    return isinstance(x, np.ndarray)


def raw_and_scale(x):
    """``(u, s)`` with ``x = sqrt(s) u``; numeric input gets ``s = 1``."""
    if isinstance(x, ScaledVector):
        return x.vector, x.scale2
    if is_numeric(x):
        return x, 1.0
    return tuple(x), Fraction(1)


def to_numpy(x) -> np.ndarray:
    if isinstance(x, ScaledVector):
        return x.to_numpy()
    return np.asarray([float(a) for a in x]) if not is_numeric(x) else x.astype(float)


def _quadratic_forms(system: CliffordSystem, u):
    """``<P_j u, u>`` for every ``j``."""
    if is_numeric(u):
        pu = system.numeric_operators @ u
        return pu @ (system.metric.diag_array * u)
    return [pseudo_inner(system.apply(j, u), u, system.metric) for j in range(system.m)]


def eval_H(system: CliffordSystem, x):
    """``sum_j eta_jj <P_j x, x>^2``."""
    u, s = raw_and_scale(x)
    forms = _quadratic_forms(system, u)
    eta = system.eta.diag
    if is_numeric(u):
        return float(np.dot(np.asarray(eta, dtype=float), forms**2))
    return s * s * sum(e * q * q for e, q in zip(eta, forms))


def eval_F(system: CliffordSystem, x):
    u, s = raw_and_scale(x)
    n2 = pseudo_inner(u, u, system.metric) * s
    return n2 * n2 - 2 * eval_H(system, x)


def on_sphere(system: CliffordSystem, x, tol: float = MEMBERSHIP_TOL) -> bool:
    u, s = raw_and_scale(x)
    n2 = s * pseudo_inner(u, u, system.metric)
    return abs(n2 - 1) < tol if is_numeric(u) else n2 == 1


def eval_f(system: CliffordSystem, x, tol: float = MEMBERSHIP_TOL):
    """``F`` restricted to the unit pseudo-sphere."""
    if not on_sphere(system, x, tol):
        raise OffSphere("eval_f needs <x, x> = 1")
    return eval_F(system, x)


def grad_F(system: CliffordSystem, x: np.ndarray) -> np.ndarray:
    """Euclidean gradient of ``F`` (closed form)."""
    jd = system.metric.diag_array
    px = system.numeric_operators @ x
    forms = px @ (jd * x)
    eta = np.asarray(system.eta.diag, dtype=float)
    n2 = float(np.dot(jd * x, x))
    return 4 * n2 * jd * x - 8 * jd * ((eta * forms) @ px)


def grad_f_numeric(system: CliffordSystem, x, h: float = 1e-6) -> np.ndarray:
    """Sphere gradient of ``f`` via central differences of ``F``.

    ``J dF`` is the ambient pseudo-gradient; its tangential part is
    ``g - <g, x> x`` because ``<x, x> = 1``.
    """
    x = to_numpy(x)
    n = x.size
    d = np.empty(n)
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        d[k] = (eval_F(system, x + e) - eval_F(system, x - e)) / (2 * h)
    g = system.metric.diag_array * d
    return g - pseudo_inner(g, x, system.metric) * x


def m_plus_membership(system: CliffordSystem, x, tol: float = MEMBERSHIP_TOL) -> bool:
    """``<x, x> = 1`` and ``<P_j x, x> = 0`` for all ``j``."""
    if not on_sphere(system, x, tol):
        return False
    u, s = raw_and_scale(x)
    forms = _quadratic_forms(system, u)
    if is_numeric(u):
        return bool(np.max(np.abs(forms)) < tol)
    return all(q == 0 for q in forms)


# --------------------------------------------------------------------------- #
# geodesics and level sets


def geodesic(x, v, t: float, kappa: float, g: Metric) -> np.ndarray:
    """Geodesic of the pseudo-sphere of curvature ``kappa`` through ``x``
    with initial velocity ``v``."""
    x, v = to_numpy(x), to_numpy(v)
    tau = kappa * pseudo_inner(v, v, g)
    if tau > 0:
        w = math.sqrt(tau)
        return math.cos(w * t) * x + math.sin(w * t) / w * v
    if tau < 0:
        w = math.sqrt(-tau)
        return math.cosh(w * t) * x + math.sinh(w * t) / w * v
    return x + t * v


def geodesic_velocity(x, v, t: float, kappa: float, g: Metric) -> np.ndarray:
    x, v = to_numpy(x), to_numpy(v)
    tau = kappa * pseudo_inner(v, v, g)
    if tau > 0:
        w = math.sqrt(tau)
        return -w * math.sin(w * t) * x + math.cos(w * t) * v
    if tau < 0:
        w = math.sqrt(-tau)
        return w * math.sinh(w * t) * x + math.cosh(w * t) * v
    return v.copy()


@dataclass(frozen=True)
class WRNInterval:
    """``W_RN(f) ∩ (-1, inf)``: ``(lo, hi)`` minus optional ``1``."""

    lo: float
    hi: float
    excludes_one: bool = False

    def contains(self, c: float) -> bool:
        if not self.lo < c < self.hi:
            return False
        return not (self.excludes_one and c == 1)

    def label(self) -> str:
        hi = "inf" if math.isinf(self.hi) else f"{self.hi:g}"
        base = f"({self.lo:g}, {hi})"
        return base + "\\{1}" if self.excludes_one else base

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": "inf" if math.isinf(self.hi) else self.hi,
                "excludes": [1] if self.excludes_one else [], "label": self.label()}


def w_rn_interval(system_or_r, m: int | None = None) -> WRNInterval:
    """Regular levels with non-degenerate level sets, depending only on ``r``."""
    if isinstance(system_or_r, CliffordSystem):
        r, m = system_or_r.r, system_or_r.m
    else:
        r = system_or_r
        if m is None:
            raise ValueError("m is required when passing r directly")
    if r == 0:
        return WRNInterval(-1.0, 1.0)
    if r == m:
        return WRNInterval(1.0, math.inf)
    return WRNInterval(-1.0, math.inf, excludes_one=True)


def delta_of_level(c: float) -> int:
    """Type of ``M_c``: ``+1`` for ``|c| < 1``, ``-1`` for ``c > 1``."""
    if -1 < c < 1:
        return 1
    if c > 1:
        return -1
    raise OutsideWRN(f"c = {c} is not a regular level above -1")


def t_of_level(c: float) -> float:
    if delta_of_level(c) == 1:
        return math.acos(c) / 4
    return math.acosh(c) / 4


def level_of_t(t: float, delta: int) -> float:
    return math.cos(4 * t) if delta == 1 else math.cosh(4 * t)


def _check_level(system: CliffordSystem, c: float) -> int:
    if not w_rn_interval(system).contains(c):
        raise OutsideWRN(f"c = {c} outside {w_rn_interval(system).label()} for r = {system.r}")
    return delta_of_level(c)


# --------------------------------------------------------------------------- #
# normal data


def normal_coefficients(system: CliffordSystem, x, v) -> tuple:
    """``eta_ii <v, P_i x>``: coordinates of ``v`` in the frame ``{P_i x}``."""
    eta = system.eta.diag
    if is_numeric(x) or is_numeric(v):
        x, v = to_numpy(x), to_numpy(v)
        px = system.numeric_operators @ x
        return tuple(float(e * c) for e, c in zip(eta, px @ (system.metric.diag_array * v)))
    ux, sx = raw_and_scale(x)
    uv, sv = raw_and_scale(v)
    if sx != sv:
        raise ValueError("exact normal data needs matching squared scales")
    return tuple(e * sx * pseudo_inner(uv, system.apply(i, ux), system.metric) for i, e in enumerate(eta))


def solve_Q_v(system: CliffordSystem, x, v, tol: float = NORMAL_TOL) -> SigmaElement:
    """The unique ``Q_v`` in the span with ``Q_v x = v``."""
    q = SigmaElement(system, normal_coefficients(system, x, v))
    image = q.apply(x)
    if is_numeric(image) or is_numeric(v):
        if np.max(np.abs(to_numpy(image) - to_numpy(v))) > tol * max(1.0, np.max(np.abs(to_numpy(v)))):
            raise NotNormal("v is not in the normal space at x")
    else:
        iv, _ = raw_and_scale(image)
        vv, _ = raw_and_scale(v)
        if tuple(iv) != tuple(vv):
            raise NotNormal("v is not in the normal space at x")
    return q


def focal_map_phi(system: CliffordSystem, x, v, c: float, tol: float = NORMAL_TOL) -> np.ndarray:
    """``gamma_{x,v}(t_c)``, the point of ``M_c`` over ``(x, v)``."""
    delta = _check_level(system, c)
    vv = pseudo_inner(to_numpy(v), to_numpy(v), system.metric)
    if abs(vv - delta) > tol:
        raise NotNormal(f"<v, v> = {vv}, level c = {c} needs {delta}")
    return geodesic(x, v, t_of_level(c), 1.0, system.metric)


def focal_map_velocity(system: CliffordSystem, x, v, c: float) -> np.ndarray:
    _check_level(system, c)
    return geodesic_velocity(x, v, t_of_level(c), 1.0, system.metric)


def unit_normal_xi(system: CliffordSystem, x, c: float) -> np.ndarray:
    """Unit normal of ``M_c`` at ``x``; ``<xi, xi> = delta``."""
    delta = _check_level(system, c)
    x = to_numpy(x)
    denom = delta * (1 - c * c)
    if denom <= 0:
        raise OutsideWRN("delta (1 - c^2) must be positive")
    px = system.numeric_operators @ x
    forms = px @ (system.metric.diag_array * x)
    eta = np.asarray(system.eta.diag, dtype=float)
    return ((1 - c) * x - 2 * ((eta * forms) @ px)) / math.sqrt(denom)


def sigma_orthocomplement(q: SigmaElement) -> list:
    """Basis of ``{Q : <Q, Q_v> = 0}`` as Sigma elements."""
    system = q.system
    eta = system.eta.diag
    row = [e * c for e, c in zip(eta, q.coeffs)]
    if all(isinstance(a, (int, Fraction)) for a in row):
        basis = kernel_basis([row])
    else:
        arr = np.asarray(row, dtype=float)[None, :]
        _, _, vt = np.linalg.svd(arr)
        basis = [tuple(float(a) for a in r) for r in vt[1:]]
    return [SigmaElement(system, tuple(b)) for b in basis]


def shape_kernel(system: CliffordSystem, x, v) -> list:
    """Basis ``{Q_k Q_v x}`` of ``ker S_v``, ``Q_k`` spanning the complement of ``Q_v``."""
    q = solve_Q_v(system, x, v)
    delta = sigma_metric(q, q)
    if (abs(delta) < NORMAL_TOL) if isinstance(delta, float) else delta == 0:
        raise NullNormal("null normal directions are not supported")
    out = [qk.apply(v) for qk in sigma_orthocomplement(q)]
    _assert_independent(out, system.m - 1)
    return out


def _assert_independent(vectors, expected: int) -> None:
    raws = [raw_and_scale(w)[0] for w in vectors]
    if any(is_numeric(w) for w in raws):
        got = int(np.linalg.matrix_rank(np.array([to_numpy(w) for w in vectors]), tol=1e-9))
    else:
        got = rank(DenseMatrix([list(w) for w in raws]))
    if got != expected:
        raise ArithmeticError(f"shape kernel spans dimension {got}, expected {expected}")
