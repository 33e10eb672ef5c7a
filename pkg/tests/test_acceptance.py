"""Acceptance criteria 1-12, one PASS/FAIL line each."""

import math
import random
import time

import numpy as np
import pytest

from clifford_forge import catalog, construct_clifford_system
from clifford_forge.cli import main as cli_main
from clifford_forge.clifford_system import (
    LemmaViolation,
    basis_product_sign,
    change_basis,
    full_product,
    random_pseudo_orthogonal,
    verify_system,
)
from clifford_forge.construction import base_family, construct_family, minimal_order_lookup
from clifford_forge.exact_core import gram_matrix
from clifford_forge.focal_geometry import functions as fg
from clifford_forge.focal_geometry.oracles import shape_annihilation_residual
from clifford_forge.focal_geometry.sampling import child_generators, sample_m_plus, sample_normal
from clifford_forge.focal_geometry.strata import (
    M1,
    M2,
    WHOLE,
    classify_case,
    connectedness_census,
    eigensplit,
    lemma_bounds_hold,
    stratum_of,
)
from clifford_forge.focal_geometry.witnesses import inhomogeneity_witness, n_plus_witness

F_TOL = 1e-9
NORMAL_TOL = 1e-8
SHAPE_TOL = 1e-5
TARGET_TOL = 1e-9

PRINTED_BASES = {
    (1, 0): [[[1]]],
    (1, 1): [[[0, -1], [1, 0]]],
    (2, 0): [[[1, 0], [0, -1]], [[0, -1], [-1, 0]]],
    (2, 1): [[[0, 1], [-1, 0]], [[1, 0], [0, -1]]],
    (2, 2): [
        [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
        [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]],
    ],
}
ORDER_TABLE = {0: 1, 1: 2, 2: 4, 3: 4, 4: 8, 5: 8, 6: 8, 7: 8}
SCOPE = [(m, r, d) for m in (4, 8) for r in range(0, m + 1, 2) for d in (1, 2)]


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def examples():
    return construct_clifford_system(4, 0), construct_clifford_system(4, 4)


def test_criterion_01_construction_sweep(report):
    start = time.perf_counter()
    failures = []
    for m in range(2, 11):
        for r in range(m + 1):
            cert = verify_system(construct_clifford_system(m, r, 1), random_checks=0)
            if not cert.passed:
                failures.append((m, r, cert.failed_check))
    elapsed = time.perf_counter() - start
    report(1, not failures and elapsed < 10, f"{sum(m + 1 for m in range(2, 11))} systems verified in {elapsed:.2f} s, failures={failures}")


def test_criterion_02_base_fidelity(report):
    bad = [k for k, want in PRINTED_BASES.items()
           if [a.to_numpy().astype(int).tolist() for a in base_family(*k).matrices] != want]
    report(2, not bad, f"5 base families entry-for-entry, mismatches={bad}")


def test_criterion_03_order_anchors(report):
    l40, l44 = construct_family(4, 0)[0].order, construct_family(4, 4)[0].order
    table_ok = all(minimal_order_lookup(m) == v for m, v in ORDER_TABLE.items())
    report(3, l40 == l44 == 8 and table_ok, f"l(4,0)={l40}, l(4,4)={l44}, order table m<=7 matches={table_ok}")


def test_criterion_04_eigensplit(report, examples):
    bad = []
    for m, r, d in SCOPE:
        system = construct_clifford_system(m, r, d)
        split = eigensplit(system)
        cross = gram_matrix(split.plus, system.metric, split.minus)
        zero = all(a == 0 for row in cross.rows for a in row)
        if split.dims != (system.l, system.l) or not zero:
            bad.append((m, r, d))
    sig = [(eigensplit(s).s1, eigensplit(s).s2) for s in examples]
    report(4, not bad and sig == [(4, 4), (4, 4)], f"{len(SCOPE)} systems, bad={bad}, example signatures={sig}")


def test_criterion_05_case_classification(report, examples):
    cases = [classify_case(s) for s in examples]
    bounds = [key for key in SCOPE if not lemma_bounds_hold(construct_clifford_system(*key))]
    report(5, cases == ["a", "d3"] and not bounds, f"cases={cases}, bound violations={bounds}")


def _focal_run(system, c, delta, count, seed):
    worst_f = worst_n = 0.0
    pts = sample_m_plus(system, count, seed).points
    for x, rng in zip(pts, child_generators(seed + 1, count)):
        v = sample_normal(system, x, delta, rng)
        y = fg.focal_map_phi(system, x, v, c)
        worst_f = max(worst_f, abs(fg.eval_f(system, y) - c))
        xi = fg.unit_normal_xi(system, y, c)
        worst_n = max(worst_n, float(np.linalg.norm(fg.focal_map_velocity(system, x, v, c) + xi)))
    return worst_f, worst_n


def test_criterion_06_focal_identities(report, examples):
    start = time.perf_counter()
    s40, s44 = examples
    t = 0.1
    f1, n1 = _focal_run(s40, math.cos(4 * t), 1, 200, 0)
    f2, n2 = _focal_run(s44, math.cosh(4 * t), -1, 200, 0)
    elapsed = time.perf_counter() - start
    ok = max(f1, f2) < F_TOL and max(n1, n2) < NORMAL_TOL and elapsed < 5
    report(6, ok, f"f residual {max(f1, f2):.1e}, normal residual {max(n1, n2):.1e}, {elapsed:.2f} s")


def test_criterion_07_shape_kernel(report, examples):
    worst = 0.0
    systems = [(examples[0], 1), (examples[1], -1), (construct_clifford_system(4, 2), 1)]
    for system, delta in systems:
        pts = sample_m_plus(system, 20, seed=7).points
        for x, rng in zip(pts, child_generators(8, 20)):
            v = sample_normal(system, x, delta, rng)
            worst = max(worst, shape_annihilation_residual(system, x, v, fg.shape_kernel(system, x, v)))
    report(7, worst < SHAPE_TOL, f"max residual {worst:.1e} over 60 normal data")


def test_criterion_08_n_plus(report):
    bad = []
    count = 0
    for key in SCOPE:
        system = construct_clifford_system(*key)
        if system.l <= system.m:
            continue
        p = full_product(system)
        for comp in connectedness_census(system)["components"]:
            rec = n_plus_witness(system, comp)
            u = rec.point.vector
            sound = p.apply(u) == u or p.apply(u) == tuple(-a for a in u)
            count += 1
            if not (rec.passed and sound):
                bad.append((key, comp))
    report(8, not bad and count > 0, f"{count} certified N+ points, Px=+-x exactly, failures={bad}")


def test_criterion_09_inhomogeneity(report, examples, tmp_path):
    s40, s44 = examples
    recs = [inhomogeneity_witness(s40, M1), inhomogeneity_witness(s40, M2), inhomogeneity_witness(s44, WHOLE)]
    path = tmp_path / "s42.json"
    cli_main(["construct", "--m", "4", "--r", "2", "--out", str(path)])
    code = cli_main(["witness", "--in", str(path), "--out", str(tmp_path / "w.json")])
    ok = all(r.passed and len(r.checks) == 4 for r in recs) and code == 3
    report(9, ok, f"checks {[r.passed for r in recs]} for M+,1 / M+,2 / M+ ; (4,2) d=1 exit {code}")


def test_criterion_10_census(report, examples):
    c1, c2 = (connectedness_census(s) for s in examples)
    st1 = [s["status"] for s in c1["strata"]]
    st2 = [s["status"] for s in c2["strata"]]
    ok = (c1["component_count"] == 2 and st1 == ["witnessed", "witnessed", "empty_by_case"]
          and c2["component_count"] == 1 and st2 == ["witnessed"] * 3)
    report(10, ok, f"5.1 components {c1['component_count']} strata {st1}; 5.2 components {c2['component_count']} strata {st2}")


def test_criterion_11_catalog(report):
    bundle = catalog.example_5_1()
    eig = catalog.basis_eigen_residual(bundle)
    want = [[catalog.BASIS_GRAM[i] if i == j else 0 for j in range(8)] for i in range(8)]
    grams = catalog.scaled_gram(bundle.system, bundle.a_basis) == want == catalog.scaled_gram(bundle.system, bundle.b_basis)
    pts = catalog.sample_stratum(bundle.system, M1, 100, seed=0)
    q_worst = sphere_worst = 0.0
    for z in pts:
        img = catalog.diffeo_forward(bundle, z)
        res = catalog.q_frame_residuals(bundle, img)
        q_worst = max(q_worst, res["gram"], res["eigen"])
        sphere_worst = max(sphere_worst, img.x_residual, img.y_residual)
    probe = catalog.diffeo_injectivity_probe(bundle, pts)
    ok = all(eig.values()) and grams and q_worst < TARGET_TOL and sphere_worst < TARGET_TOL and probe["collisions"] == 0
    report(11, ok, f"bases exact={all(eig.values()) and grams}, q-frame {q_worst:.1e}, "
                   f"target spheres {sphere_worst:.1e}, collisions {probe['collisions']}")


def test_criterion_12_invariance(report, examples):
    rng = random.Random(2024)
    systems = list(examples) + [construct_clifford_system(4, 2)]
    mismatches = violations = 0
    for system in systems:
        x = tuple(rng.randint(-5, 5) for _ in range(system.dim))
        h, f = fg.eval_H(system, x), fg.eval_F(system, x)
        for _ in range(100):
            new = change_basis(system, random_pseudo_orthogonal(4, system.r, rng, length=3))
            if fg.eval_H(new, x) != h or fg.eval_F(new, x) != f:
                mismatches += 1
        for _ in range(1000):
            try:
                basis_product_sign(system, random_pseudo_orthogonal(4, system.r, rng, length=3))
            except LemmaViolation:
                violations += 1
    report(12, mismatches == 0 and violations == 0,
           f"H/F mismatches {mismatches} over 300 basis changes; sign-lemma violations {violations} over 3000 trials")
