"""Exact rational arithmetic: metrics, signed permutations, dense matrices.

Every matrix built by the construction layer has entries in {-1, 0, 1} with one
nonzero per row and column, so :class:`SignedPermMatrix` carries most of the
load.  :class:`DenseMatrix` covers derived operators such as eigenprojectors
and basis changes.  Entries of a dense matrix are ``Fraction`` (exact) or
``float`` (real); comparison helpers honour an explicit tolerance for the
latter and demand equality for the former.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

ExactScalar = Fraction
Vector = tuple


class DimensionError(ValueError):
    """Operands whose shapes do not fit together."""


def as_exact(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact scalar")


def is_exact_value(value) -> bool:
    return isinstance(value, (int, Fraction, np.integer)) and not isinstance(value, bool)


def _is_zero(value, tol: float) -> bool:
    if tol == 0:
        return value == 0
    return abs(value) <= tol


# --------------------------------------------------------------------------- #
# metric


@dataclass(frozen=True)
class Metric:
    """The diagonal metric ``J_{neg,pos} = (-E_neg) + E_pos``."""

    neg: int
    pos: int

    def __post_init__(self):
        if self.neg < 0 or self.pos < 0:
            raise ValueError("metric counts must be non-negative")

    @property
    def dim(self) -> int:
        return self.neg + self.pos

    @cached_property
    def diag(self) -> tuple:
        return (-1,) * self.neg + (1,) * self.pos

    @cached_property
    def diag_array(self) -> np.ndarray:
        return np.array(self.diag, dtype=float)

    def matrix(self) -> "DenseMatrix":
        return DenseMatrix.diagonal(self.diag)

    def to_json(self) -> dict:
        return {"neg": self.neg, "pos": self.pos}


def _check_len(u, g: Metric):
    if len(u) != g.dim:
        raise DimensionError(f"vector of length {len(u)} under a metric of dimension {g.dim}")


def pseudo_inner(u, v, g: Metric):
    """``tu J v`` for the metric ``g``; exact on rational input."""
    _check_len(u, g)
    _check_len(v, g)
    if isinstance(u, np.ndarray) or isinstance(v, np.ndarray):
        return float(np.dot(np.asarray(u, dtype=float) * g.diag_array, np.asarray(v, dtype=float)))
    n = g.neg
    neg = sum(a * b for a, b in zip(u[:n], v[:n]) if a and b)
    pos = sum(a * b for a, b in zip(u[n:], v[n:]) if a and b)
    return pos - neg


def pseudo_norm2(u, g: Metric):
    return pseudo_inner(u, u, g)


# --------------------------------------------------------------------------- #
# exact vectors


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u):
    return tuple(c * a for a in u)


def vec_is_zero(u) -> bool:
    return all(a == 0 for a in u)


def vec_combination(coeffs, vectors):
    """``sum(c_i * v_i)`` over exact vectors."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("empty combination")
    out = [0] * len(vectors[0])
    for c, v in zip(coeffs, vectors):
        if c == 0:
            continue
        for k, a in enumerate(v):
            if a:
                out[k] += c * a
    return tuple(out)


def unit_vector(n: int, i: int) -> tuple:
    return tuple(1 if k == i else 0 for k in range(n))


def normalize_entries(u) -> tuple:
    """Collapse integral Fractions to ints; speeds up later arithmetic."""
    return tuple(int(a) if isinstance(a, Fraction) and a.denominator == 1 else a for a in u)


@dataclass(frozen=True)
class ScaledVector:
    """The real vector ``sqrt(scale2) * vector`` with exact ``vector``.

    Irrational normalizers such as ``1/sqrt(2)`` never appear in coordinates;
    every inner product of scaled vectors that the library needs is rational.
    """

    vector: tuple
    scale2: Fraction = Fraction(1)

    def __post_init__(self):
        if self.scale2 <= 0:
            raise ValueError("squared scale must be positive")

    def __len__(self):
        return len(self.vector)

    def norm2(self, g: Metric) -> Fraction:
        return self.scale2 * pseudo_norm2(self.vector, g)

    def to_numpy(self) -> np.ndarray:
        return np.sqrt(float(self.scale2)) * np.array([float(a) for a in self.vector])

    def to_json(self) -> dict:
        return {"vector": [fraction_str(a) for a in self.vector], "scale2": fraction_str(self.scale2)}

    @classmethod
    def from_json(cls, data: dict) -> "ScaledVector":
        return cls(
            normalize_entries(Fraction(a) for a in data["vector"]),
            Fraction(data.get("scale2", "1")),
        )


def fraction_str(value) -> str:
    value = as_exact(value)
    return f"{value.numerator}/{value.denominator}"


# --------------------------------------------------------------------------- #
# matrices


class SignedPermMatrix:
    """Square matrix with exactly one ``+-1`` in every row and column.

    Column ``j`` holds ``sign[j]`` in row ``image[j]`` (0-based), i.e.
    ``M e_j = sign[j] e_{image[j]}``.
    """

    __slots__ = ("image", "sign", "_hash")

    def __init__(self, image: Sequence[int], sign: Sequence[int]):
        image = tuple(int(i) for i in image)
        sign = tuple(int(s) for s in sign)
        if len(image) != len(sign) or not image:
            raise DimensionError("image and sign must be non-empty and of equal length")
        if sorted(image) != list(range(len(image))):
            raise ValueError(f"{image} is not a permutation of 0..{len(image) - 1}")
        if any(s not in (-1, 1) for s in sign):
            raise ValueError("signs must be +1 or -1")
        self.image = image
        self.sign = sign
        self._hash = None

    @property
    def order(self) -> int:
        return len(self.image)

    @property
    def shape(self) -> tuple:
        return (self.order, self.order)

    @classmethod
    def identity(cls, n: int) -> "SignedPermMatrix":
        return cls(range(n), (1,) * n)

    @classmethod
    def from_rows(cls, rows) -> "SignedPermMatrix":
        return cls.from_dense(DenseMatrix(rows))

    @classmethod
    def from_dense(cls, m: "DenseMatrix") -> "SignedPermMatrix":
        if m.nrows != m.ncols:
            raise DimensionError("signed permutations are square")
        image, sign = [None] * m.ncols, [None] * m.ncols
        for i, row in enumerate(m.rows):
            for j, a in enumerate(row):
                if a == 0:
                    continue
                if a not in (1, -1) or image[j] is not None:
                    raise ValueError("not a signed permutation matrix")
                image[j], sign[j] = i, int(a)
        if None in image:
            raise ValueError("not a signed permutation matrix")
        return cls(image, sign)

    @classmethod
    def try_from(cls, m) -> "SignedPermMatrix | None":
        if isinstance(m, SignedPermMatrix):
            return m
        try:
            return cls.from_dense(m)
        except (ValueError, TypeError):
            return None

    def entry(self, i: int, j: int) -> int:
        return self.sign[j] if self.image[j] == i else 0

    def apply(self, x):
        """``M x`` for an exact tuple, a ScaledVector or a numpy array."""
        if isinstance(x, ScaledVector):
            return ScaledVector(self.apply(x.vector), x.scale2)
        if len(x) != self.order:
            raise DimensionError("vector length does not match matrix order")
        if isinstance(x, np.ndarray):
            out = np.empty_like(x, dtype=float)
            out[list(self.image)] = np.asarray(self.sign, dtype=float) * x
            return out
        out = [0] * self.order
        for j, (i, s) in enumerate(zip(self.image, self.sign)):
            a = x[j]
            out[i] = a if s == 1 else -a
        return tuple(out)

    def __matmul__(self, other):
        if isinstance(other, SignedPermMatrix):
            if other.order != self.order:
                raise DimensionError("orders differ")
            img = tuple(self.image[i] for i in other.image)
            sgn = tuple(s * self.sign[i] for i, s in zip(other.image, other.sign))
            return SignedPermMatrix(img, sgn)
        if isinstance(other, DenseMatrix):
            return self.to_dense() @ other
        return self.apply(other)

    def __neg__(self):
        return SignedPermMatrix(self.image, tuple(-s for s in self.sign))

    @property
    def T(self) -> "SignedPermMatrix":
        img = [0] * self.order
        sgn = [0] * self.order
        for j, (i, s) in enumerate(zip(self.image, self.sign)):
            img[i] = j
            sgn[i] = s
        return SignedPermMatrix(img, sgn)

    def transpose(self):
        return self.T

    def trace(self) -> int:
        return sum(s for j, (i, s) in enumerate(zip(self.image, self.sign)) if i == j)

    def to_dense(self) -> "DenseMatrix":
        n = self.order
        rows = [[0] * n for _ in range(n)]
        for j, (i, s) in enumerate(zip(self.image, self.sign)):
            rows[i][j] = s
        return DenseMatrix(rows)

    def to_numpy(self) -> np.ndarray:
        out = np.zeros((self.order, self.order))
        out[list(self.image), list(range(self.order))] = self.sign
        return out

    def __eq__(self, other):
        if isinstance(other, SignedPermMatrix):
            return self.image == other.image and self.sign == other.sign
        if isinstance(other, DenseMatrix):
            return self.to_dense() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.image, self.sign))
        return self._hash

    def __repr__(self):
        return f"SignedPermMatrix(image={list(self.image)}, sign={list(self.sign)})"


class DenseMatrix:
    """Immutable row-major matrix with Fraction (or float) entries."""

    __slots__ = ("rows",)

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(r) for r in rows)
        if not rows or not rows[0]:
            raise DimensionError("empty matrix")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionError("ragged rows")
        self.rows = rows

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    @property
    def shape(self) -> tuple:
        return (self.nrows, self.ncols)

    @property
    def order(self) -> int:
        if self.nrows != self.ncols:
            raise DimensionError("matrix is not square")
        return self.nrows

    @property
    def is_exact(self) -> bool:
        return all(is_exact_value(a) for r in self.rows for a in r)

    @classmethod
    def identity(cls, n: int) -> "DenseMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "DenseMatrix":
        return cls([[0] * (n if m is None else m) for _ in range(n)])

    @classmethod
    def diagonal(cls, diag) -> "DenseMatrix":
        n = len(diag)
        return cls([[diag[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, cols) -> "DenseMatrix":
        return cls(zip(*cols))

    @classmethod
    def from_numpy(cls, arr: np.ndarray) -> "DenseMatrix":
        return cls(arr.tolist())

    def columns(self) -> list:
        return [tuple(c) for c in zip(*self.rows)]

    def entry(self, i: int, j: int):
        return self.rows[i][j]

    @property
    def T(self) -> "DenseMatrix":
        return DenseMatrix(zip(*self.rows))

    def transpose(self):
        return self.T

    def apply(self, x):
        if isinstance(x, ScaledVector):
            return ScaledVector(self.apply(x.vector), x.scale2)
        if len(x) != self.ncols:
            raise DimensionError("vector length does not match column count")
        if isinstance(x, np.ndarray):
            return self.to_numpy() @ x
        return tuple(sum(a * b for a, b in zip(r, x) if a and b) for r in self.rows)

    def __matmul__(self, other):
        if isinstance(other, SignedPermMatrix):
            other = other.to_dense()
        if isinstance(other, DenseMatrix):
            if self.ncols != other.nrows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            cols = other.columns()
            return DenseMatrix(
                [tuple(sum(a * b for a, b in zip(r, c) if a and b) for c in cols) for r in self.rows]
            )
        return self.apply(other)

    def _zip(self, other, op):
        if isinstance(other, SignedPermMatrix):
            other = other.to_dense()
        if self.shape != other.shape:
            raise DimensionError("shapes differ")
        return DenseMatrix([[op(a, b) for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return DenseMatrix([[-a for a in r] for r in self.rows])

    def scale(self, c) -> "DenseMatrix":
        return DenseMatrix([[c * a for a in r] for r in self.rows])

    def trace(self):
        return sum(self.rows[i][i] for i in range(self.order))

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(a) for a in r] for r in self.rows])

    def equals(self, other, tol: float = 0.0) -> bool:
        if isinstance(other, SignedPermMatrix):
            other = other.to_dense()
        if self.shape != other.shape:
            return False
        return all(_is_zero(a - b, tol) for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    def __eq__(self, other):
        if isinstance(other, (DenseMatrix, SignedPermMatrix)):
            return self.equals(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(a) for a in r) + "]" for r in self.rows)
        return f"DenseMatrix([{body}])"


Matrix = Union[SignedPermMatrix, DenseMatrix]


def as_dense(m) -> DenseMatrix:
    if isinstance(m, DenseMatrix):
        return m
    if isinstance(m, SignedPermMatrix):
        return m.to_dense()
    if isinstance(m, np.ndarray):
        return DenseMatrix.from_numpy(m)
    return DenseMatrix(m)


def matrix_is_exact(m) -> bool:
    return isinstance(m, SignedPermMatrix) or (isinstance(m, DenseMatrix) and m.is_exact)


def matrices_equal(a, b, tol: float = 0.0) -> bool:
    if isinstance(a, SignedPermMatrix) and isinstance(b, SignedPermMatrix):
        return a == b
    return as_dense(a).equals(as_dense(b), tol)


def kronecker(a, b):
    """Kronecker product; signed permutations stay signed permutations."""
    if isinstance(a, SignedPermMatrix) and isinstance(b, SignedPermMatrix):
        nb = b.order
        image, sign = [], []
        for i in range(a.order):
            for j in range(nb):
                image.append(a.image[i] * nb + b.image[j])
                sign.append(a.sign[i] * b.sign[j])
        return SignedPermMatrix(image, sign)
    a, b = as_dense(a), as_dense(b)
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            rows.append([x * y for x in ra for y in rb])
    return DenseMatrix(rows)


def block_matrix(blocks) -> DenseMatrix:
    """Assemble a dense matrix from a grid of dense blocks (None = zero)."""
    heights = [next(as_dense(b).nrows for b in row if b is not None) for row in blocks]
    widths = [next(as_dense(blocks[i][j]).ncols for i in range(len(blocks)) if blocks[i][j] is not None)
              for j in range(len(blocks[0]))]
    rows = []
    for bi, row in enumerate(blocks):
        for k in range(heights[bi]):
            line = []
            for bj, blk in enumerate(row):
                line.extend([0] * widths[bj] if blk is None else as_dense(blk).rows[k])
            rows.append(line)
    return DenseMatrix(rows)


def direct_sum(a, b) -> DenseMatrix:
    return block_matrix([[a, None], [None, b]])


def _metric_of(g, n: int) -> Metric:
    if g.dim != n:
        raise DimensionError(f"matrix order {n} does not match metric dimension {g.dim}")
    return g


def is_symmetric_wrt(q, g: Metric, tol: float = 0.0) -> bool:
    """``tQ = J Q J``, i.e. ``Q`` is self-adjoint for the metric."""
    if isinstance(q, SignedPermMatrix):
        _metric_of(g, q.order)
        d = g.diag
        qt = q.T
        # (J Q J) e_j = d[j] * sign[j] * d[image[j]] e_{image[j]}
        jqj = SignedPermMatrix(q.image, [d[j] * s * d[i] for j, (i, s) in enumerate(zip(q.image, q.sign))])
        return qt == jqj
    q = as_dense(q)
    _metric_of(g, q.order)
    d = g.diag
    n = q.order
    return all(_is_zero(q.rows[j][i] - d[i] * q.rows[i][j] * d[j], tol) for i in range(n) for j in range(n))


def is_pseudo_orthogonal(a, g: Metric, tol: float = 0.0) -> bool:
    """``tA J A = J``."""
    if isinstance(a, SignedPermMatrix):
        _metric_of(g, a.order)
        d = g.diag
        return all(d[i] == d[j] for j, i in enumerate(a.image))
    a = as_dense(a)
    _metric_of(g, a.order)
    d = g.diag
    cols = a.columns()
    n = a.order
    for i in range(n):
        for j in range(i, n):
            val = sum(d[k] * x * y for k, (x, y) in enumerate(zip(cols[i], cols[j])) if x and y)
            if not _is_zero(val - (d[i] if i == j else 0), tol):
                return False
    return True


# --------------------------------------------------------------------------- #
# elimination


def _integer_rows(rows) -> list:
    """Scale each row by the lcm of its denominators."""
    out = []
    for r in rows:
        r = [as_exact(a) for a in r]
        den = 1
        for a in r:
            den = den * a.denominator // np.gcd(den, a.denominator)
        out.append([int(a * den) for a in r])
    return out


def _bareiss_echelon(rows: list) -> tuple:
    """Fraction-free row echelon form; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, nrows):
            a = m[i][c]
            row_i = m[i]
            row_r = m[r]
            for k in range(c, ncols):
                row_i[k] = (piv * row_i[k] - a * row_r[k]) // prev
        prev = piv
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows) -> int:
    rows = [r for r in (rows.rows if isinstance(rows, DenseMatrix) else rows)]
    if not rows:
        return 0
    _, pivots = _bareiss_echelon(_integer_rows(rows))
    return len(pivots)


def kernel_basis(m) -> list:
    """Exact basis of ``{v : M v = 0}``; empty iff ``M`` is injective.

    Accepts a DenseMatrix, a SignedPermMatrix or a list of rows.  Each basis
    vector has a 1 in its free column and 0 in the other free columns.
    """
    if isinstance(m, SignedPermMatrix):
        return []
    rows = m.rows if isinstance(m, DenseMatrix) else [tuple(r) for r in m]
    if not rows:
        raise DimensionError("empty matrix")
    ncols = len(rows[0])
    echelon, pivots = _bareiss_echelon(_integer_rows(rows))
    # back-substitute to reduced form over the rationals
    red = [[Fraction(a) for a in r] for r in echelon]
    for i in reversed(range(len(pivots))):
        c = pivots[i]
        piv = red[i][c]
        red[i] = [a / piv for a in red[i]]
        for k in range(i):
            f = red[k][c]
            if f:
                red[k] = [a - f * b for a, b in zip(red[k], red[i])]
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][fc]
        basis.append(normalize_entries(v))
    return basis


def independent_subset(vectors) -> list:
    """Indices of a maximal linearly independent prefix-greedy subset."""
    pivots = {}
    chosen = []
    for idx, v in enumerate(vectors):
        w = {k: as_exact(a) for k, a in enumerate(v) if a}
        while w:
            lead = min(w)
            if lead not in pivots:
                break
            prow = pivots[lead]
            f = w[lead] / prow[lead]
            for k, a in prow.items():
                nv = w.get(k, 0) - f * a
                if nv:
                    w[k] = nv
                else:
                    w.pop(k, None)
        if w:
            pivots[min(w)] = w
            chosen.append(idx)
    return chosen


# --------------------------------------------------------------------------- #
# Gram matrices and inertia


def gram_matrix(vectors, g: Metric, others=None) -> DenseMatrix:
    """``[<u_i, w_j>]`` exactly; ``others`` defaults to ``vectors``."""
    vectors = list(vectors)
    others = vectors if others is None else list(others)
    if not vectors or not others:
        raise DimensionError("empty vector list")
    ints = all(isinstance(a, int) for v in vectors + others for a in v)
    if ints and max(abs(a) for v in vectors + others for a in v) < 2**20 and g.dim < 2**20:
        u = np.array(vectors, dtype=np.int64)
        w = np.array(others, dtype=np.int64)
        prod = (u * np.array(g.diag, dtype=np.int64)) @ w.T
        return DenseMatrix([[int(a) for a in r] for r in prod])
    return DenseMatrix([[pseudo_inner(u, w, g) for w in others] for u in vectors])


def is_symmetric(mat: DenseMatrix) -> bool:
    n = mat.order
    return all(mat.rows[i][j] == mat.rows[j][i] for i in range(n) for j in range(i + 1, n))


def signature_of_gram(gram) -> tuple:
    """Inertia ``(neg, zero, pos)`` of a symmetric exact matrix.

    Symmetric LDLt with pivoting: a nonzero diagonal pivot when one exists,
    otherwise a congruence ``e_i -> e_i + e_j`` that creates one.
    """
    gram = as_dense(gram)
    n = gram.order
    if not is_symmetric(gram):
        raise ValueError("Gram matrix is not symmetric")
    rows = gram.rows
    if all(rows[i][j] == 0 for i in range(n) for j in range(n) if i != j):
        diag = [rows[i][i] for i in range(n)]
        return (sum(1 for a in diag if a < 0), sum(1 for a in diag if a == 0), sum(1 for a in diag if a > 0))
    a = [[as_exact(x) for x in r] for r in rows]
    neg = pos = 0
    active = list(range(n))
    while active:
        p = next((i for i in active if a[i][i] != 0), None)
        if p is None:
            pair = next(((i, j) for i in active for j in active if i < j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # row/col i += row/col j
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            p = i
        d = a[p][p]
        if d > 0:
            pos += 1
        else:
            neg += 1
        active.remove(p)
        row_p = a[p]
        for i in active:
            f = a[i][p] / d
            if f:
                row_i = a[i]
                for k in active:
                    row_i[k] -= f * row_p[k]
        for i in active:
            a[i][p] = a[p][i] = Fraction(0)
    return (neg, n - neg - pos, pos)
