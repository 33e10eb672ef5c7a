"""Seeded sampling of M+ and of unit normal data."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..clifford_system import CliffordSystem
from .functions import MEMBERSHIP_TOL, m_plus_membership
from .oracles import ProjectionFailure, newton_project

MAX_ATTEMPTS = 1000


@dataclass
class SampleSet:
    points: list
    strata: Counter = field(default_factory=Counter)
    discarded: int = 0

    def to_json(self) -> dict:
        return {"count": len(self.points), "strata": dict(sorted(self.strata.items())), "discarded": self.discarded}


def child_generators(seed: int, count: int) -> list:
    """One independent generator per sample (``SeedSequence.spawn``)."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _start(system: CliffordSystem, rng: np.random.Generator) -> np.ndarray:
    jd = system.metric.diag_array
    while True:
        y = rng.standard_normal(system.dim)
        n2 = float(y @ (jd * y))
        if n2 > 0:
            return y / math.sqrt(n2)


def sample_point(system: CliffordSystem, rng: np.random.Generator) -> tuple:
    """One point of M+ and the number of failed projections before it."""
    failures = 0
    for _ in range(MAX_ATTEMPTS):
        try:
            x = newton_project(system, _start(system, rng))
        except ProjectionFailure:
            failures += 1
            continue
        if m_plus_membership(system, x, MEMBERSHIP_TOL):
            return x, failures
        failures += 1
    raise ProjectionFailure(f"no point of M+ after {MAX_ATTEMPTS} attempts")


def sample_m_plus(system: CliffordSystem, count: int, seed: int = 0) -> SampleSet:
    """``count`` points of M+, deterministic in ``seed``, with a stratum tally."""
    from .strata import stratum_of

    out = SampleSet([])
    for rng in child_generators(seed, count):
        x, failures = sample_point(system, rng)
        out.points.append(x)
        out.discarded += failures
        out.strata[stratum_of(system, x)] += 1
    return out


def sample_normal(system: CliffordSystem, x: np.ndarray, delta: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``v = Q x`` with ``<Q, Q> = delta``."""
    if delta == 1 and system.r == system.m:
        raise ValueError("no spacelike normals when r = m")
    if delta == -1 and system.r == 0:
        raise ValueError("no timelike normals when r = 0")
    eta = np.asarray(system.eta.diag, dtype=float)
    while True:
        c = rng.standard_normal(system.m)
        n2 = float(c @ (eta * c))
        if n2 * delta > 1e-3 * float(c @ c):
            c = c / math.sqrt(abs(n2))
            return np.tensordot(c, system.numeric_operators, 1) @ x
