"""``clifford-forge`` command line.

Exit codes: 0 success, 1 internal invariant failure, 2 user input error,
3 hypothesis not met (a documented non-error).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import catalog
from .clifford_system import LemmaViolation, full_product, verify_system
from .construction import ConstructionError, construct_clifford_system
from .focal_geometry import functions as fg
from .focal_geometry.sampling import child_generators, sample_normal, sample_point
from .focal_geometry.strata import classify_case, connectedness_census, eigensplit, lemma_bounds_hold
from .focal_geometry.witnesses import (
    HypothesisUnmet,
    inhomogeneity_witness,
    n_plus_membership,
    n_plus_witness,
)
from .serialization import SchemaError, dumps, load_system, system_to_json

EXIT_OK, EXIT_INTERNAL, EXIT_USER, EXIT_HYPOTHESIS = 0, 1, 2, 3
F_TOL = 1e-9  # relative to max(1, |c|)

# Logical consequences of the certificates that are reported, not computed.
DERIVATIONS = (
    "a component containing a certified non-N+ point and a certified N+ point is not an orbit",
    "inhomogeneity of M+ components transfers to every M_c along the focal map",
)


class UserError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    m: int | None = None
    r: int | None = None
    d: int = 1
    c: float | None = None
    seed: int = 0
    sample_count: int = 100
    input: str | None = None
    output: str | None = None
    name: str | None = None
    tol_membership: float = fg.MEMBERSHIP_TOL
    tol_geodesic: float = 1e-8


def threads() -> int:
    raw = os.environ.get("CLIFFORD_FORGE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UserError(f"CLIFFORD_FORGE_THREADS must be an integer, got {raw!r}") from None


def _emit(cfg: RunConfig, payload) -> None:
    text = dumps(payload)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(cfg: RunConfig):
    if not cfg.input:
        raise UserError("--in is required")
    try:
        return load_system(cfg.input)
    except OSError as exc:
        raise UserError(str(exc)) from exc


def _verified(cfg: RunConfig):
    system = _load(cfg)
    cert = verify_system(system, random_checks=4, seed=cfg.seed)
    return system, cert


def _failure(cfg: RunConfig, system, cert) -> int:
    _emit(cfg, {"system_header": system.header(), "certificate": cert.to_json(),
                "failed_check": cert.failed_check, "counterexample": cert.counterexample})
    return EXIT_INTERNAL


def _has_product(system) -> bool:
    return system.m % 4 == 0 and system.r % 2 == 0


# --------------------------------------------------------------------------- #
# commands


def cmd_construct(cfg: RunConfig) -> int:
    if cfg.m is None or cfg.r is None:
        raise UserError("--m and --r are required")
    if cfg.m < 2:
        raise UserError("m must be at least 2")
    if not 0 <= cfg.r <= cfg.m:
        raise UserError(f"r must lie in [0, {cfg.m}]")
    if cfg.d < 1:
        raise UserError("d must be at least 1")
    system = construct_clifford_system(cfg.m, cfg.r, cfg.d)
    cert = verify_system(system, random_checks=4, seed=cfg.seed)
    payload = system_to_json(system)
    payload["certificate"] = cert.to_json()
    _emit(cfg, payload)
    return EXIT_OK if cert.passed else EXIT_INTERNAL


def cmd_verify(cfg: RunConfig) -> int:
    system, cert = _verified(cfg)
    _emit(cfg, {"system_header": system.header(), "certificate": cert.to_json()})
    return EXIT_OK if cert.passed else EXIT_INTERNAL


def _witness_section(system) -> tuple:
    """``(payload, status)`` with status in {"ok", "failed", "hypothesis_unmet"}."""
    if not _has_product(system):
        return {"status": "hypothesis_unmet", "reason": "needs m = 0 mod 4 and r even"}, "hypothesis_unmet"
    comps = connectedness_census(system)["components"]
    n_plus, inhom = [], []
    ok = True
    for comp in comps:
        rec = n_plus_witness(system, comp)
        soundness = full_product(system).apply(rec.point.vector)
        exact_eigen = soundness == rec.point.vector or soundness == tuple(-a for a in rec.point.vector)
        rec.checks["eigen_soundness"] = exact_eigen
        ok = ok and rec.passed
        n_plus.append(rec)
    if system.l <= system.m:
        return ({"n_plus_witness": n_plus, "inhomogeneity_witness": {
            "status": "hypothesis_unmet", "reason": f"needs l > m, got l = {system.l}, m = {system.m}"}},
            "hypothesis_unmet" if ok else "failed")
    for comp in comps:
        rec = inhomogeneity_witness(system, comp)
        rec.checks["verdicts_differ"] = n_plus_membership(system, rec.point).member is False
        ok = ok and rec.passed
        inhom.append(rec)
    return {"n_plus_witness": n_plus, "inhomogeneity_witness": inhom}, "ok" if ok else "failed"


def cmd_analyze(cfg: RunConfig) -> int:
    system, cert = _verified(cfg)
    if not cert.passed:
        return _failure(cfg, system, cert)
    report = {"system_header": system.header(), "certificate": cert.to_json(),
              "w_rn": fg.w_rn_interval(system).to_json()}
    if not _has_product(system):
        report["status"] = "hypothesis_unmet"
        report["reason"] = "the eigensplit needs m = 0 mod 4 and r even"
        _emit(cfg, report)
        return EXIT_HYPOTHESIS
    split = eigensplit(system)
    census = connectedness_census(system)
    report.update({
        "case": classify_case(system),
        "lemma_bounds": lemma_bounds_hold(system),
        "eigensplit": {"dims": list(split.dims), "s1": split.s1, "s2": split.s2},
        "components": census["components"],
        "component_count": census["component_count"],
        "strata": census["strata"],
    })
    section, status = _witness_section(system)
    report.update(section)
    report["derivations"] = list(DERIVATIONS)
    report["status"] = "failed" if status == "failed" else "ok"
    _emit(cfg, report)
    return EXIT_INTERNAL if status == "failed" else EXIT_OK


def cmd_witness(cfg: RunConfig) -> int:
    system, cert = _verified(cfg)
    if not cert.passed:
        return _failure(cfg, system, cert)
    section, status = _witness_section(system)
    payload = {"system_header": system.header(), "status": status}
    payload.update(section)
    _emit(cfg, payload)
    return {"ok": EXIT_OK, "failed": EXIT_INTERNAL}.get(status, EXIT_HYPOTHESIS)


def _sample_one(system, rng, c: float, delta: int, tol: float) -> dict:
    x, _ = sample_point(system, rng)
    if not fg.m_plus_membership(system, x, tol):
        return {"member": False, "f_residual": math.inf, "normal_residual": math.inf}
    v = sample_normal(system, x, delta, rng)
    y = fg.focal_map_phi(system, x, v, c)
    gamma = fg.focal_map_velocity(system, x, v, c)
    xi = fg.unit_normal_xi(system, y, c)
    return {
        "member": True,
        "f_residual": abs(float(fg.eval_f(system, y)) - c),
        "normal_residual": float(np.linalg.norm(gamma + xi)),
    }


def cmd_sample(cfg: RunConfig) -> int:
    if cfg.c is None:
        raise UserError("--c is required")
    if cfg.sample_count < 1:
        raise UserError("--count must be positive")
    system, cert = _verified(cfg)
    if not cert.passed:
        return _failure(cfg, system, cert)
    interval = fg.w_rn_interval(system)
    if not interval.contains(cfg.c):
        raise UserError(f"c = {cfg.c} outside {interval.label()} for r = {system.r}")
    delta = fg.delta_of_level(cfg.c)
    rngs = child_generators(cfg.seed, cfg.sample_count)
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        rows = list(pool.map(lambda g: _sample_one(system, g, cfg.c, delta, cfg.tol_membership), rngs))
    f_max = max(r["f_residual"] for r in rows)
    n_max = max(r["normal_residual"] for r in rows)
    off = sum(not r["member"] for r in rows)
    f_tol = F_TOL * max(1.0, abs(cfg.c))
    passed = off == 0 and f_max < f_tol and n_max < cfg.tol_geodesic
    _emit(cfg, {
        "system_header": system.header(), "c": cfg.c, "delta": delta, "t_c": fg.t_of_level(cfg.c),
        "count": cfg.sample_count, "seed": cfg.seed,
        "off_m_plus": off, "max_f_residual": f_max, "max_normal_residual": n_max,
        "tolerances": {"f": f_tol, "normal": cfg.tol_geodesic, "membership": cfg.tol_membership},
        "passed": passed,
    })
    return EXIT_OK if passed else EXIT_INTERNAL


def cmd_example(cfg: RunConfig) -> int:
    if cfg.name not in catalog.EXAMPLES:
        raise UserError(f"unknown example {cfg.name!r}; choose from {sorted(catalog.EXAMPLES)}")
    bundle = catalog.get_example(cfg.name)
    report = catalog.bundle_report(bundle, count=cfg.sample_count, seed=cfg.seed)
    report["system"] = system_to_json(bundle.system)
    if bundle.a_basis is not None:
        report["bases"] = {"scale2": catalog.BASIS_SCALE2, "a": bundle.a_basis, "b": bundle.b_basis}
    _emit(cfg, report)
    return EXIT_OK if report["passed"] else EXIT_INTERNAL


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "analyze": cmd_analyze,
    "witness": cmd_witness,
    "sample": cmd_sample,
    "example": cmd_example,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clifford-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inp=True):
        if inp:
            p.add_argument("--in", dest="input", help="system JSON file")
        p.add_argument("--out", dest="output", help="write JSON here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-membership", type=float, default=fg.MEMBERSHIP_TOL)
        p.add_argument("--tol-geodesic", type=float, default=1e-8)
        return p

    p = common(sub.add_parser("construct", help="build and verify a Clifford system"), inp=False)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    common(sub.add_parser("verify", help="check the defining relations of a system file"))
    common(sub.add_parser("analyze", help="case, eigensplit, strata and witnesses"))
    common(sub.add_parser("witness", help="N+ and inhomogeneity certificates per component"))
    p = common(sub.add_parser("sample", help="focal-map identities on seeded samples"))
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--count", type=int, default=100)
    p = common(sub.add_parser("example", help="run one of the two worked examples"), inp=False)
    p.add_argument("name", help='"5.1" or "5.2"')
    p.add_argument("--count", type=int, default=100)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        m=getattr(args, "m", None),
        r=getattr(args, "r", None),
        d=getattr(args, "d", 1),
        c=getattr(args, "c", None),
        seed=args.seed,
        sample_count=getattr(args, "count", 100),
        input=getattr(args, "input", None),
        output=args.output,
        name=getattr(args, "name", None),
        tol_membership=args.tol_membership,
        tol_geodesic=args.tol_geodesic,
    )


def run(cfg: RunConfig) -> int:
    try:
        if not math.isfinite(cfg.tol_geodesic) or cfg.tol_geodesic <= 0 or cfg.tol_membership <= 0:
            raise UserError("tolerances must be positive")
        return COMMANDS[cfg.command](cfg)
    except (UserError, SchemaError, ConstructionError, fg.OutsideWRN) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except HypothesisUnmet as exc:
        print(f"hypothesis unmet: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except LemmaViolation as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USER
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
