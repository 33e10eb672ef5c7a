"""Families of orthogonal matrices with prescribed anticommutation, and their
lift to Clifford systems on neutral pseudo-Euclidean space.

A family ``A_1..A_m`` of order ``l`` satisfies ``A_i A_j + A_j A_i = 2 eta_ij E``
with ``eta = J_{r, m-r}``.  Families for every ``(m, r)`` are produced from five
small base families by three doubling/quadrupling Kronecker steps; every
intermediate family is re-verified exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .exact_core import Metric, SignedPermMatrix, kronecker


class ConstructionError(ValueError):
    """Invalid ``(m, r)`` or a precondition of an extension step."""


class RelationFailure(AssertionError):
    """A constructed family failed an exact defining relation (a bug)."""


def _sp(rows) -> SignedPermMatrix:
    return SignedPermMatrix.from_rows(rows)


# 2x2 factors
SIGMA_X = _sp([[0, 1], [1, 0]])
SIGMA_Z = _sp([[1, 0], [0, -1]])
SKEW_2 = _sp([[0, 1], [-1, 0]])

# 4x4 factors of the r = 0 -> r = m + 2 step
FULL_FAMILY_FACTOR = _sp([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]])
FULL_NEXT_FACTOR = _sp([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
FULL_LAST_FACTOR = _sp([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]])

BASE_FAMILIES = {
    (1, 0): (_sp([[1]]),),
    (1, 1): (_sp([[0, -1], [1, 0]]),),
    (2, 0): (_sp([[1, 0], [0, -1]]), _sp([[0, -1], [-1, 0]])),
    (2, 1): (_sp([[0, 1], [-1, 0]]), _sp([[1, 0], [0, -1]])),
    (2, 2): (
        _sp([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]),
        _sp([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]),
    ),
}


@dataclass(frozen=True)
class Step:
    """One entry of a construction trace."""

    kind: str  # "base" | "r_plus_one" | "full" | "zero"
    m: int
    r: int

    def to_json(self) -> dict:
        return {"step": self.kind, "m": self.m, "r": self.r}

    @classmethod
    def from_json(cls, data: dict) -> "Step":
        return cls(data["step"], int(data["m"]), int(data["r"]))


@dataclass(frozen=True)
class ConstructionTrace:
    steps: tuple = field(default_factory=tuple)

    def to_json(self) -> list:
        return [s.to_json() for s in self.steps]

    @classmethod
    def from_json(cls, data) -> "ConstructionTrace":
        return cls(tuple(Step.from_json(s) for s in data))

    def replay(self) -> "OrthogonalFamily":
        if not self.steps or self.steps[0].kind != "base":
            raise ConstructionError("trace must start with a base step")
        fam = base_family(self.steps[0].m, self.steps[0].r)
        for step in self.steps[1:]:
            fam = _EXTENSIONS[step.kind](fam)
            if (fam.m, fam.r) != (step.m, step.r):
                raise ConstructionError(f"trace step {step} produced ({fam.m}, {fam.r})")
        return fam


@dataclass(frozen=True)
class OrthogonalFamily:
    m: int
    r: int
    matrices: tuple

    def __post_init__(self):
        if len(self.matrices) != self.m:
            raise ConstructionError(f"expected {self.m} matrices, got {len(self.matrices)}")
        if not 0 <= self.r <= self.m:
            raise ConstructionError(f"r = {self.r} outside [0, {self.m}]")
        orders = {a.order for a in self.matrices}
        if len(orders) != 1:
            raise ConstructionError("matrices of different orders")

    @property
    def order(self) -> int:
        return self.matrices[0].order

    @property
    def eta(self) -> Metric:
        return Metric(self.r, self.m - self.r)

    def verify(self) -> None:
        """Raise :class:`RelationFailure` unless every defining relation holds."""
        verify_family(self)


def verify_family(fam: OrthogonalFamily) -> None:
    ident = SignedPermMatrix.identity(fam.order)
    eta = fam.eta.diag
    mats = fam.matrices
    for i, a in enumerate(mats):
        # signed permutations are automatically Euclidean-orthogonal
        sq = a @ a
        want = ident if eta[i] == 1 else -ident
        if sq != want:
            raise RelationFailure(f"A_{i + 1}^2 != {eta[i]} E for ({fam.m}, {fam.r})")
        if eta[i] == -1 and a.T != -a:
            raise RelationFailure(f"A_{i + 1} is not skew-symmetric")
        if eta[i] == 1 and a.T != a:
            raise RelationFailure(f"A_{i + 1} is not symmetric")
        for j in range(i + 1, len(mats)):
            if a @ mats[j] != -(mats[j] @ a):
                raise RelationFailure(f"A_{i + 1}, A_{j + 1} do not anticommute for ({fam.m}, {fam.r})")


def base_family(m: int, r: int) -> OrthogonalFamily:
    try:
        mats = BASE_FAMILIES[(m, r)]
    except KeyError:
        raise ConstructionError(f"no base family for (m, r) = ({m}, {r})") from None
    fam = OrthogonalFamily(m, r, mats)
    verify_family(fam)
    return fam


def extend_r_plus_one(fam: OrthogonalFamily) -> OrthogonalFamily:
    """``(m, r)`` of order ``l`` -> ``(m + 2, r + 1)`` of order ``2l``."""
    m, r = fam.m, fam.r
    ident = SignedPermMatrix.identity(fam.order)
    a = fam.matrices
    out = [kronecker(SIGMA_X, a[j]) for j in range(r)]
    out.append(kronecker(SKEW_2, ident))
    out.extend(kronecker(SIGMA_X, a[j]) for j in range(r, m))
    out.append(kronecker(SIGMA_Z, ident))
    new = OrthogonalFamily(m + 2, r + 1, tuple(out))
    verify_family(new)
    return new


def extend_to_full(fam: OrthogonalFamily) -> OrthogonalFamily:
    """``(m, 0)`` of order ``l`` -> ``(m + 2, m + 2)`` of order ``4l``."""
    if fam.r != 0:
        raise ConstructionError(f"extend_to_full needs r = 0, got r = {fam.r}")
    ident = SignedPermMatrix.identity(fam.order)
    out = [kronecker(FULL_FAMILY_FACTOR, a) for a in fam.matrices]
    out.append(kronecker(FULL_NEXT_FACTOR, ident))
    out.append(kronecker(FULL_LAST_FACTOR, ident))
    new = OrthogonalFamily(fam.m + 2, fam.m + 2, tuple(out))
    verify_family(new)
    return new


def extend_to_zero(fam: OrthogonalFamily) -> OrthogonalFamily:
    """``(m, m)`` of order ``l`` -> ``(m + 2, 0)`` of order ``2l``."""
    if fam.r != fam.m:
        raise ConstructionError(f"extend_to_zero needs r = m, got (m, r) = ({fam.m}, {fam.r})")
    ident = SignedPermMatrix.identity(fam.order)
    out = [kronecker(SKEW_2, a) for a in fam.matrices]
    out.append(kronecker(SIGMA_Z, ident))
    out.append(kronecker(SIGMA_X, ident))
    new = OrthogonalFamily(fam.m + 2, 0, tuple(out))
    verify_family(new)
    return new


_EXTENSIONS = {"r_plus_one": extend_r_plus_one, "full": extend_to_full, "zero": extend_to_zero}


@lru_cache(maxsize=None)
def _construct(m: int, r: int):
    if m in (1, 2):
        return base_family(m, r), (Step("base", m, r),)
    if r == m:
        fam, steps = _construct(m - 2, 0)
        return extend_to_full(fam), steps + (Step("full", m, r),)
    if r == 0:
        fam, steps = _construct(m - 2, m - 2)
        return extend_to_zero(fam), steps + (Step("zero", m, r),)
    fam, steps = _construct(m - 2, r - 1)
    return extend_r_plus_one(fam), steps + (Step("r_plus_one", m, r),)


def construct_family(m: int, r: int) -> tuple:
    """Family for ``(m, r)`` along the fixed inductive route, with its trace.

    ``r = m`` goes through :func:`extend_to_full` from ``(m - 2, 0)``, ``r = 0``
    through :func:`extend_to_zero` from ``(m - 2, m - 2)``, and every other
    ``r`` through :func:`extend_r_plus_one` from ``(m - 2, r - 1)``.
    """
    if m < 1 or not 0 <= r <= m:
        raise ConstructionError(f"invalid (m, r) = ({m}, {r})")
    fam, steps = _construct(m, r)
    return fam, ConstructionTrace(steps)


def minimal_order_lookup(m: int) -> int:
    """Smallest known order of a ``(m, m)`` family (reference table only)."""
    if m < 0:
        raise ConstructionError("m must be non-negative")
    table = (1, 2, 4, 4, 8, 8, 8, 8)
    if m < 8:
        return table[m]
    return 16 * minimal_order_lookup(m - 8)


def _anti_identity(n: int) -> SignedPermMatrix:
    return SignedPermMatrix([n - 1 - j for j in range(n)], [1] * n)


def lift_to_clifford_system(fam: OrthogonalFamily, d: int = 1, trace: ConstructionTrace | None = None):
    """Clifford system of signature ``(m, r)`` on ``R^{2dl}_{dl}``.

    ``P_i`` is ``2d`` copies of ``A_i`` on the block anti-diagonal for
    ``i <= r`` and on the block diagonal otherwise.
    """
    from .clifford_system import CliffordSystem, verify_system

    if d < 1:
        raise ConstructionError("d must be a positive integer")
    if fam.m < 2:
        raise ConstructionError("a Clifford system needs m >= 2")
    anti = _anti_identity(2 * d)
    diag = SignedPermMatrix.identity(2 * d)
    ops = tuple(kronecker(anti if i < fam.r else diag, a) for i, a in enumerate(fam.matrices))
    half = d * fam.order
    system = CliffordSystem(
        operators=ops,
        metric=Metric(half, half),
        m=fam.m,
        r=fam.r,
        d=d,
        trace=trace,
    )
    cert = verify_system(system, random_checks=0)
    if not cert.passed:
        raise RelationFailure(f"lifted system failed {cert.failed_check}: {cert.counterexample}")
    return system


def construct_clifford_system(m: int, r: int, d: int = 1):
    """Shorthand for ``construct_family`` followed by the lift."""
    if m < 2:
        raise ConstructionError("a Clifford system needs m >= 2")
    fam, trace = construct_family(m, r)
    return lift_to_clifford_system(fam, d, trace)
