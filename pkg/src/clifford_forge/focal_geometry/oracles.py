"""Floating-point oracles: Newton projection onto M+, tangent frames, and a
finite-difference second fundamental form."""

from __future__ import annotations

import numpy as np

from ..clifford_system import CliffordSystem
from .functions import to_numpy


class ProjectionFailure(ArithmeticError):
    pass


def constraints(system: CliffordSystem, y: np.ndarray) -> np.ndarray:
    """``(<y, y> - 1, <P_1 y, y>, ..., <P_m y, y>)``."""
    jy = system.metric.diag_array * y
    forms = (system.numeric_operators @ y) @ jy
    return np.concatenate(([float(y @ jy) - 1.0], forms))


def constraint_jacobian(system: CliffordSystem, y: np.ndarray) -> np.ndarray:
    """Euclidean Jacobian; row ``j`` is ``2 J P_j y`` (``P_0 = I``)."""
    jd = system.metric.diag_array
    rows = np.vstack([y[None, :], system.numeric_operators @ y])
    return 2 * rows * jd[None, :]


def newton_project(system: CliffordSystem, y: np.ndarray, directions: np.ndarray | None = None,
                   tol: float = 1e-13, max_iter: int = 100) -> np.ndarray:
    """Project ``y`` onto M+ by Newton steps.

    Without ``directions`` the step is the minimum-norm Euclidean solution of
    the linearized constraints.  With ``directions`` (columns) the correction
    is restricted to their span, which gives a smooth local chart.
    """
    y = np.array(y, dtype=float)
    for _ in range(max_iter):
        g = constraints(system, y)
        if np.max(np.abs(g)) < tol:
            return y
        jac = constraint_jacobian(system, y)
        if directions is None:
            step, *_ = np.linalg.lstsq(jac, -g, rcond=None)
        else:
            lam = np.linalg.solve(jac @ directions, -g)
            step = directions @ lam
        y = y + step
        if not np.all(np.isfinite(y)):
            break
    g = constraints(system, y)
    if np.all(np.isfinite(g)) and np.max(np.abs(g)) < 1e3 * tol:
        return y
    raise ProjectionFailure("Newton projection did not converge")


def normal_frame(system: CliffordSystem, x: np.ndarray) -> np.ndarray:
    """Columns ``x, P_1 x, ..., P_m x`` (normal to M+ inside the ambient space)."""
    return np.column_stack([x, *(system.numeric_operators @ x)])


def tangent_basis(system: CliffordSystem, x) -> np.ndarray:
    """Columns spanning ``T_x M+``: the pseudo-orthogonal complement of the normal frame."""
    x = to_numpy(x)
    frame = normal_frame(system, x)
    constraint_rows = (frame * system.metric.diag_array[:, None]).T
    _, sv, vt = np.linalg.svd(constraint_rows)
    k = int(np.sum(sv > 1e-10 * sv[0]))
    return vt[k:].T


def second_fundamental_pairing(system: CliffordSystem, x, v, X: np.ndarray, h: float = 1e-3) -> float:
    """``<II(X, X), v>`` from the curve ``p(x + tX)`` on M+.

    ``p`` corrects along the fixed normal frame at ``x``; any chart of this
    kind has the same normal acceleration, so the central second difference
    approximates ``II(X, X)`` with ``O(h^2)`` error.
    """
    x, v = to_numpy(x), to_numpy(v)
    frame = normal_frame(system, x)
    plus = newton_project(system, x + h * X, frame)
    minus = newton_project(system, x - h * X, frame)
    acc = (plus - 2 * x + minus) / (h * h)
    return float(acc @ (system.metric.diag_array * v))


def shape_form(system: CliffordSystem, x, v, vectors, h: float = 1e-3) -> np.ndarray:
    """Matrix ``B_ij = <II(X_i, X_j), v>`` by polarization."""
    vectors = [np.asarray(to_numpy(a), dtype=float) for a in vectors]
    n = len(vectors)
    out = np.empty((n, n))
    diag = [second_fundamental_pairing(system, x, v, a, h) for a in vectors]
    for i in range(n):
        out[i, i] = diag[i]
        for j in range(i + 1, n):
            p = second_fundamental_pairing(system, x, v, vectors[i] + vectors[j], h)
            q = second_fundamental_pairing(system, x, v, vectors[i] - vectors[j], h)
            out[i, j] = out[j, i] = (p - q) / 4
    return out


def shape_annihilation_residual(system: CliffordSystem, x, v, kernel_vectors, h: float = 1e-3) -> float:
    """``max |<II(k, Y), v>|`` over kernel vectors ``k`` and a tangent basis ``Y``.

    ``S_v k = 0`` exactly when ``<II(k, Y), v> = 0`` for every tangent ``Y``.
    """
    x, v = to_numpy(x), to_numpy(v)
    tangent = tangent_basis(system, x)
    worst = 0.0
    for k in kernel_vectors:
        k = to_numpy(k)
        scale = max(1.0, float(np.linalg.norm(k)))
        k = k / scale
        for col in tangent.T:
            p = second_fundamental_pairing(system, x, v, k + col, h)
            q = second_fundamental_pairing(system, x, v, k - col, h)
            worst = max(worst, abs(p - q) / 4)
    return worst
