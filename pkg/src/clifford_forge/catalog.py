"""The two worked examples on R^16_8: signature (4, 0) and signature (4, 4).

Besides the systems themselves, the first example carries printed eigenbases
of ``P`` and a forward chart of ``M+,1`` onto ``S^7_4 x (S^4_4)_+``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .clifford_system import CliffordSystem, full_product
from .construction import base_family, construct_family, extend_to_full, extend_to_zero, lift_to_clifford_system
from .exact_core import Metric, ScaledVector, kernel_basis, pseudo_inner
from .focal_geometry.functions import raw_and_scale, to_numpy
from .focal_geometry.sampling import child_generators, sample_point
from .focal_geometry.strata import M1, M2, eigensplit, stratum_of

TARGET_TOL = 1e-9
X_METRIC = Metric(4, 4)
Y_METRIC = Metric(4, 1)


class SingularChart(ArithmeticError):
    """The 4x4 matrix inverted by the chart is singular at this point."""


def _pair(n: int, i: int, j: int, sign: int) -> tuple:
    v = [0] * n
    v[i], v[j] = 1, sign
    return tuple(v)


# (i, j, sign) of e_i + sign e_j, 0-based, for the +1 eigenbasis; the -1
# eigenbasis flips every sign.
_A_PATTERN = ((0, 7, 1), (1, 6, 1), (2, 5, -1), (3, 4, -1),
              (8, 15, 1), (9, 14, 1), (10, 13, -1), (11, 12, -1))
A_BASIS = tuple(_pair(16, i, j, s) for i, j, s in _A_PATTERN)
B_BASIS = tuple(_pair(16, i, j, -s) for i, j, s in _A_PATTERN)
BASIS_SCALE2 = Fraction(1, 2)
BASIS_GRAM = (-1, -1, -1, -1, 1, 1, 1, 1)


@dataclass
class ExampleBundle:
    name: str
    system: CliffordSystem
    a_basis: tuple | None
    b_basis: tuple | None
    expected: dict = field(default_factory=dict)

    def scaled_a(self) -> list:
        return [ScaledVector(v, BASIS_SCALE2) for v in self.a_basis]

    def scaled_b(self) -> list:
        return [ScaledVector(v, BASIS_SCALE2) for v in self.b_basis]


def example_5_1() -> ExampleBundle:
    """Signature (4, 0), built from the (2, 2) base family by the r = m -> 0 step."""
    fam = extend_to_zero(base_family(2, 2))
    _, trace = construct_family(4, 0)
    system = lift_to_clifford_system(fam, 1, trace)
    return ExampleBundle(
        "5.1", system, A_BASIS, B_BASIS,
        {"case": "a", "w_rn": "(-1, 1)", "component_count": 2, "s1": 4, "s2": 4,
         "diffeo_target_name": "S^7_4 x (S^4_4)_+ x S^3_0"},
    )


def example_5_2() -> ExampleBundle:
    """Signature (4, 4), built from the (2, 0) base family by the r = 0 -> m + 2 step."""
    fam = extend_to_full(base_family(2, 0))
    _, trace = construct_family(4, 4)
    system = lift_to_clifford_system(fam, 1, trace)
    return ExampleBundle(
        "5.2", system, None, None,
        {"case": "d3", "w_rn": "(1, inf)", "component_count": 1, "s1": 4, "s2": 4,
         "diffeo_target_name": "S^7_4 x S^4_0 x H^3_3"},
    )


EXAMPLES = {"5.1": example_5_1, "5.2": example_5_2}


def get_example(name: str) -> ExampleBundle:
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None


# --------------------------------------------------------------------------- #
# exact checks on the printed bases


def basis_eigen_residual(bundle: ExampleBundle) -> dict:
    """Exact ``P a_i = a_i`` and ``P b_j = -b_j`` on the integer vectors."""
    p = full_product(bundle.system)
    plus = all(p.apply(a) == a for a in bundle.a_basis)
    minus = all(p.apply(b) == tuple(-x for x in b) for b in bundle.b_basis)
    return {"a_in_E_plus": plus, "b_in_E_minus": minus}


def scaled_gram(system: CliffordSystem, basis) -> list:
    return [[BASIS_SCALE2 * pseudo_inner(u, v, system.metric) for v in basis] for u in basis]


# --------------------------------------------------------------------------- #
# forward chart of M+,1


def precursor_matrices(c) -> tuple:
    """The two 4x4 matrices whose quotient defines ``A(c)`` (``c`` is 0-based)."""
    c1, c2, c3, c4, c5, c6, c7, c8 = c
    left = [[c7, -c8, -c5, c6], [-c6, c5, -c8, c7], [c5, c6, c7, c8], [-c8, -c7, c6, c5]]
    right = [[-c3, c4, c1, -c2], [c2, -c1, c4, -c3], [-c1, -c2, -c3, -c4], [c4, c3, -c2, -c1]]
    return left, right


def a_matrix(c):
    """``A(c) = M1(c)^{-1} M2(c)``; exact for rational ``c``.

    ``A`` is homogeneous of degree 0, so unnormalized rational coordinates
    give the exact value for the whole ray.
    """
    left, right = precursor_matrices(c)
    if all(isinstance(a, (int, Fraction)) for a in c):
        cols = []
        for k in range(4):
            aug = [row + [-right[i][k]] for i, row in enumerate(left)]
            sol = kernel_basis(aug)
            if len(sol) != 1 or sol[0][4] == 0:
                raise SingularChart("precursor matrix is singular")
            cols.append([Fraction(a) / sol[0][4] for a in sol[0][:4]])
        return [[cols[k][i] for k in range(4)] for i in range(4)]
    m1 = np.asarray(left, dtype=float)
    scale = max(1.0, float(np.max(np.abs(m1))))
    if abs(np.linalg.det(m1 / scale)) < 1e-12:
        raise SingularChart("precursor matrix is singular")
    return np.linalg.solve(m1, np.asarray(right, dtype=float))


def coordinates(bundle: ExampleBundle, z) -> tuple:
    """``(c, d)`` with ``z_+ = sum c^i a_i`` and ``z_- = sum d^j b_j`` (real)."""
    g = bundle.system.metric
    zn = to_numpy(z)
    r2 = math.sqrt(float(BASIS_SCALE2))
    c = np.array([gi * pseudo_inner(zn, r2 * np.asarray(a, dtype=float), g) for gi, a in zip(BASIS_GRAM, bundle.a_basis)])
    d = np.array([gi * pseudo_inner(zn, r2 * np.asarray(b, dtype=float), g) for gi, b in zip(BASIS_GRAM, bundle.b_basis)])
    return c, d


def _exact_coordinate_ray(bundle: ExampleBundle, z):
    """Rational vector proportional to ``c(z)`` when ``z`` is exact."""
    u, _ = raw_and_scale(z)
    g = bundle.system.metric
    return [gi * pseudo_inner(u, a, g) for gi, a in zip(BASIS_GRAM, bundle.a_basis)]


def q_frame(bundle: ExampleBundle, amat) -> np.ndarray:
    """Columns ``q_1..q_4`` in ambient coordinates."""
    amat = np.asarray([[float(a) for a in row] for row in amat])
    b = math.sqrt(float(BASIS_SCALE2)) * np.asarray(bundle.b_basis, dtype=float).T
    out = []
    for i in range(4):
        col = amat[:, i]
        denom = 1 - float(col @ col)
        if denom <= 0:
            raise SingularChart("q-frame normalizer is not positive")
        coeff = np.concatenate([np.eye(4)[i], -col])
        out.append(b @ coeff / math.sqrt(denom))
    return np.column_stack(out)


@dataclass
class ChartImage:
    x: np.ndarray
    y: np.ndarray
    c: np.ndarray
    a: object
    q: np.ndarray
    x_residual: float
    y_residual: float

    @property
    def image(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


def diffeo_forward(bundle: ExampleBundle, z) -> ChartImage:
    """``z -> (x(z), y(z))`` from ``M+,1`` to ``S^7_4 x (S^4_4)_+``."""
    if bundle.a_basis is None:
        raise ValueError("this bundle has no printed chart")
    system = bundle.system
    if stratum_of(system, z) != M1:
        raise ValueError("diffeo_forward needs a point of M+,1")
    c, _ = coordinates(bundle, z)
    if isinstance(z, np.ndarray):
        amat = a_matrix(c)
    else:
        amat = a_matrix(_exact_coordinate_ray(bundle, z))
    q = q_frame(bundle, amat)
    zn = to_numpy(z)
    p = full_product(system).to_numpy()
    z_minus = (zn - p @ zn) / 2
    g = system.metric
    y5_sq = float(-np.sum(c[:4] ** 2) + np.sum(c[4:] ** 2))
    if y5_sq <= 0:
        raise ValueError("y5 is not real at this point")
    y5 = math.sqrt(y5_sq)
    y = np.array([-pseudo_inner(z_minus, q[:, j], g) for j in range(4)] + [y5])
    x = c / y5
    jx = np.asarray(X_METRIC.diag, dtype=float)
    jy = np.asarray(Y_METRIC.diag, dtype=float)
    return ChartImage(
        x=x, y=y, c=c, a=amat, q=q,
        x_residual=abs(float(x @ (jx * x)) - 1),
        y_residual=abs(float(y @ (jy * y)) - 1),
    )


def q_frame_residuals(bundle: ExampleBundle, image: ChartImage) -> dict:
    g = bundle.system.metric
    q = image.q
    gram = np.array([[pseudo_inner(q[:, i], q[:, j], g) for j in range(4)] for i in range(4)])
    p = full_product(bundle.system).to_numpy()
    return {
        "gram": float(np.max(np.abs(gram + np.eye(4)))),
        "eigen": float(np.max(np.abs(p @ q + q))),
    }


def sample_stratum(system: CliffordSystem, label: str, count: int, seed: int = 0, max_draws: int = 100000) -> list:
    """``count`` seeded points of M+ lying in stratum ``label`` (rejection)."""
    out = []
    draws = 0
    child = 0
    while len(out) < count:
        rng = child_generators(seed + child, 1)[0]
        child += 1
        for _ in range(64):
            draws += 1
            if draws > max_draws:
                raise RuntimeError(f"stratum {label} not reached after {max_draws} draws")
            x, _ = sample_point(system, rng)
            if stratum_of(system, x) == label:
                out.append(x)
                break
    return out


def sample_eigensphere(system: CliffordSystem, eps: int, count: int, seed: int = 0) -> list:
    """Random points of ``E_eps(P) ∩ S`` (Gaussian in an exact eigenbasis)."""
    basis = np.asarray(eigensplit(system).basis(eps), dtype=float)
    jd = system.metric.diag_array
    out = []
    for rng in child_generators(seed, count):
        while True:
            v = rng.standard_normal(basis.shape[0]) @ basis
            n2 = float(v @ (jd * v))
            if n2 > 1e-6:
                out.append(v / math.sqrt(n2))
                break
    return out


def diffeo_injectivity_probe(bundle: ExampleBundle, samples: list, input_sep: float = 1e-4,
                             image_sep: float = 1e-8) -> dict:
    """Pairwise check that distinct inputs have distinct images (statistical)."""
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    images = []
    singular = 0
    for z in samples:
        try:
            images.append((to_numpy(z), diffeo_forward(bundle, z).image))
        except SingularChart:
            singular += 1
    collisions = 0
    min_image = math.inf
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            din = float(np.linalg.norm(images[i][0] - images[j][0]))
            dout = float(np.linalg.norm(images[i][1] - images[j][1]))
            if din > input_sep:
                min_image = min(min_image, dout)
                if dout <= image_sep:
                    collisions += 1
    return {"samples": len(samples), "charted": len(images), "singular": singular,
            "collisions": collisions, "min_image_distance": min_image}


def domain_split_probe(bundle: ExampleBundle, z) -> dict:
    """``z`` and ``P_4 z`` sit in different strata; mirrored through ``P_4`` the
    chart sends them to the two halves ``y5 >= 1`` and ``y5 <= -1``."""
    system = bundle.system
    hz = system.apply(system.m - 1, to_numpy(z))
    forward = diffeo_forward(bundle, z)
    back = system.apply(system.m - 1, hz)
    mirrored = diffeo_forward(bundle, back)
    y_minus = mirrored.y.copy()
    y_minus[4] = -y_minus[4]
    return {
        "z_stratum": stratum_of(system, z),
        "hz_stratum": stratum_of(system, hz),
        "z_half": "+" if forward.y[4] >= 1 else "?",
        "hz_half": "-" if y_minus[4] <= -1 else "?",
    }


def bundle_report(bundle: ExampleBundle, count: int = 100, seed: int = 0) -> dict:
    """End-to-end bundle checks used by the ``example`` command."""
    from .focal_geometry.functions import w_rn_interval
    from .focal_geometry.strata import classify_case, connectedness_census

    system = bundle.system
    split = eigensplit(system)
    report = {
        "name": bundle.name,
        "system_header": system.header(),
        "case": classify_case(system),
        "w_rn": w_rn_interval(system).label(),
        "eigensplit": split.to_json(),
        "component_count": connectedness_census(system)["component_count"],
        "expected": bundle.expected,
    }
    checks = {
        "case": report["case"] == bundle.expected["case"],
        "w_rn": report["w_rn"] == bundle.expected["w_rn"],
        "component_count": report["component_count"] == bundle.expected["component_count"],
        "signatures": (split.s1, split.s2) == (bundle.expected["s1"], bundle.expected["s2"]),
    }
    if bundle.a_basis is not None:
        eig = basis_eigen_residual(bundle)
        checks.update(eig)
        want = [[BASIS_GRAM[i] if i == j else 0 for j in range(8)] for i in range(8)]
        checks["a_gram"] = scaled_gram(system, bundle.a_basis) == want
        checks["b_gram"] = scaled_gram(system, bundle.b_basis) == want
        pts = sample_stratum(system, M1, count, seed)
        worst = {"x": 0.0, "y": 0.0, "q_gram": 0.0, "q_eigen": 0.0}
        y5_ok = True
        for z in pts:
            img = diffeo_forward(bundle, z)
            res = q_frame_residuals(bundle, img)
            worst["x"] = max(worst["x"], img.x_residual)
            worst["y"] = max(worst["y"], img.y_residual)
            worst["q_gram"] = max(worst["q_gram"], res["gram"])
            worst["q_eigen"] = max(worst["q_eigen"], res["eigen"])
            y5_ok = y5_ok and img.y[4] >= 1 - TARGET_TOL
        probe = diffeo_injectivity_probe(bundle, pts)
        split_probe = domain_split_probe(bundle, pts[0])
        hsamples = [system.apply(system.m - 1, z) for z in pts[:20]]
        checks["h_maps_to_M2"] = all(stratum_of(system, w) == M2 for w in hsamples)
        checks["target_spheres"] = bool(max(worst["x"], worst["y"]) < TARGET_TOL and y5_ok)
        checks["q_frame"] = max(worst["q_gram"], worst["q_eigen"]) < TARGET_TOL
        checks["injectivity"] = probe["collisions"] == 0 and probe["singular"] == 0
        checks["domain_split"] = split_probe["z_half"] == "+" and split_probe["hz_half"] == "-" \
            and split_probe["hz_stratum"] == M2
        report["diffeo"] = {"residuals": worst, "probe": probe, "domain_split": split_probe}
    else:
        pts = sample_eigensphere(system, 1, min(count, 50), seed)
        p = full_product(system).to_numpy()
        checks["M1_is_eigensphere"] = all(stratum_of(system, z) == M1 and np.allclose(p @ z, z, atol=1e-12)
                                          for z in pts)
        neg = sample_eigensphere(system, -1, min(count, 50), seed + 1)
        checks["M2_is_eigensphere"] = all(stratum_of(system, z) == M2 for z in neg)
    report["checks"] = checks
    report["passed"] = all(checks.values())
    return report

