"""Exact scalar fields and dense matrix kernels.

Two kinds of field are supported: prime fields GF(p) with p < 2**16, stored as
``int64`` numpy arrays, and the rationals (characteristic 0), stored as numpy
object arrays of :class:`fractions.Fraction`.  Every entry is kept reduced, so
two matrices over the same field are equal iff their arrays are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, isqrt
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FieldSpec",
    "GF2",
    "QQ",
    "Matrix",
    "rank",
    "nullspace_basis",
    "matmul",
    "rref",
    "inverse",
    "sparse_rank",
]

MAX_PRIME = 1 << 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A field, identified by its characteristic (0 means the rationals)."""

    characteristic: int = 2

    def __post_init__(self):
        c = self.characteristic
        if not isinstance(c, (int, np.integer)) or isinstance(c, bool):
            raise TypeError(f"characteristic must be an integer, got {c!r}")
        if c != 0 and not (_is_prime(int(c)) and c < MAX_PRIME):
            raise ValueError(f"characteristic must be 0 or a prime below 2**16, got {c}")
        object.__setattr__(self, "characteristic", int(c))

    @property
    def is_rational(self) -> bool:
        return self.characteristic == 0

    @property
    def dtype(self):
        return object if self.is_rational else np.int64

    @property
    def order(self) -> float:
        """Number of elements (infinite for the rationals)."""
        return float("inf") if self.is_rational else self.characteristic

    def scalar(self, x):
        """Reduce an integer or rational to the canonical representative."""
        if self.is_rational:
            return Fraction(x)
        p = self.characteristic
        if isinstance(x, Fraction):
            return (x.numerator % p) * pow(x.denominator % p, -1, p) % p
        return int(x) % p

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational:
            return 1 / Fraction(x)
        return pow(int(x), -1, self.characteristic)

    def zero(self):
        return Fraction(0) if self.is_rational else 0

    def one(self):
        return Fraction(1) if self.is_rational else 1

    def __str__(self):
        return "QQ" if self.is_rational else f"GF({self.characteristic})"


GF2 = FieldSpec(2)
QQ = FieldSpec(0)


def _as_array(entries, field: FieldSpec, shape=None) -> np.ndarray:
    if isinstance(entries, np.ndarray) and entries.dtype != object and not field.is_rational:
        a = np.asarray(entries, dtype=np.int64) % field.characteristic
    elif field.is_rational:
        src = np.asarray(entries, dtype=object)
        a = np.empty(src.shape, dtype=object)
        flat_src = src.reshape(-1)
        flat = a.reshape(-1)
        for i, x in enumerate(flat_src):
            flat[i] = Fraction(x)
    else:
        src = np.asarray(entries, dtype=object)
        p = field.characteristic
        a = np.empty(src.shape, dtype=np.int64)
        flat = a.reshape(-1)
        for i, x in enumerate(src.reshape(-1)):
            flat[i] = field.scalar(x)
        a %= p
    if shape is not None:
        a = a.reshape(shape)
    if a.ndim != 2:
        raise ValueError(f"matrix entries must be two-dimensional, got shape {a.shape}")
    return a


class Matrix:
    """An immutable dense matrix over a :class:`FieldSpec`."""

    __slots__ = ("field", "_a")

    def __init__(self, entries, field: FieldSpec = GF2, shape=None):
        if isinstance(entries, Matrix):
            entries = entries._a
        a = _as_array(entries, field, shape)
        a.flags.writeable = False
        self.field = field
        self._a = a

    @classmethod
    def _wrap(cls, a: np.ndarray, field: FieldSpec) -> "Matrix":
        m = cls.__new__(cls)
        a.flags.writeable = False
        m.field = field
        m._a = a
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec = GF2) -> "Matrix":
        if field.is_rational:
            a = np.empty((rows, cols), dtype=object)
            a.fill(Fraction(0))
        else:
            a = np.zeros((rows, cols), dtype=np.int64)
        return cls._wrap(a, field)

    @classmethod
    def identity(cls, n: int, field: FieldSpec = GF2) -> "Matrix":
        a = cls.zeros(n, n, field)._a.copy()
        for i in range(n):
            a[i, i] = field.one()
        return cls._wrap(a, field)

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the underlying array."""
        return self._a

    @property
    def T(self) -> "Matrix":
        return Matrix._wrap(self._a.T.copy(), self.field)

    def entries(self) -> list[int]:
        """Row-major entries as Python ints (rationals must be integral)."""
        out = []
        for x in self._a.reshape(-1):
            if self.field.is_rational:
                if x.denominator != 1:
                    raise ValueError("non-integral rational entry cannot be serialized as int")
                out.append(int(x.numerator))
            else:
                out.append(int(x))
        return out

    def tolist(self) -> list[list]:
        return [list(r) for r in self._a.tolist()]

    def is_zero(self) -> bool:
        return not np.any(self._a != 0)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_same(self, other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        a = self._a + other._a
        if not self.field.is_rational:
            a %= self.field.characteristic
        return Matrix._wrap(a, self.field)

    def __neg__(self) -> "Matrix":
        if self.field.is_rational:
            return Matrix._wrap(-self._a, self.field)
        return Matrix._wrap((-self._a) % self.field.characteristic, self.field)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def scale(self, c) -> "Matrix":
        c = self.field.scalar(c)
        a = self._a * c
        if not self.field.is_rational:
            a %= self.field.characteristic
        return Matrix._wrap(a, self.field)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and bool(np.all(self._a == other._a)))

    def __hash__(self):
        return hash((self.field, self.shape, tuple(self._a.reshape(-1).tolist())))

    def __repr__(self):
        return f"Matrix({self.tolist()}, field={self.field})"


def _check_same(a: Matrix, b: Matrix):
    if a.field != b.field:
        raise ValueError(f"field mismatch: {a.field} vs {b.field}")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a, b)
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return Matrix._wrap(mul_arrays(a._a, b._a, a.field), a.field)


def mul_arrays(a: np.ndarray, b: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Product of raw arrays over ``field``."""
    if field.is_rational:
        if a.shape[1] == 0:
            out = np.empty((a.shape[0], b.shape[1]), dtype=object)
            out.fill(Fraction(0))
            return out
        return a.dot(b)
    p = field.characteristic
    if p == 2:
        return (a.dot(b)) & 1
    # entries < 2**16, so each product < 2**32; chunk the inner dimension to stay in int64
    k = a.shape[1]
    step = 1 << 28
    if k <= step:
        return a.dot(b) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, k, step):
        out = (out + a[:, s:s + step].dot(b[s:s + step]) % p) % p
    return out


def _rref_gf2(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    m = (a & 1).astype(bool)
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        hit = np.flatnonzero(m[:, c])
        hit = hit[hit != r]
        if hit.size:
            m[hit] ^= m[r]
        pivots.append(c)
        r += 1
    return m.astype(np.int64), pivots


def _rref_modp(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    m = a.copy() % p
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, p) % p
        col = m[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            m[hit] = (m[hit] - np.outer(col[hit], m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def _rref_rational(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    rows, cols = a.shape
    m = [[Fraction(x) for x in row] for row in a.tolist()]
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                ri = m[r]
                m[i] = [x - f * y for x, y in zip(m[i], ri)]
        pivots.append(c)
        r += 1
    out = np.empty((rows, cols), dtype=object)
    for i in range(rows):
        for j in range(cols):
            out[i, j] = m[i][j]
    return out, pivots


def rref_array(a: np.ndarray, field: FieldSpec) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of a raw array and its pivot columns."""
    if field.is_rational:
        return _rref_rational(a)
    if field.characteristic == 2:
        return _rref_gf2(a)
    return _rref_modp(a, field.characteristic)


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    r, piv = rref_array(m.array, m.field)
    return Matrix._wrap(r, m.field), piv


def _bareiss_rank(rows: list[list[int]], ncols: int) -> int:
    """Fraction-free elimination over the integers; returns the rank."""
    m = [list(r) for r in rows if any(r)]
    rank = 0
    prev = 1
    c = 0
    while rank < len(m) and c < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            c += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        pv = pr[c]
        for i in range(rank + 1, len(m)):
            ri = m[i]
            f = ri[c]
            m[i] = [(pv * x - f * y) // prev for x, y in zip(ri, pr)]
        prev = pv
        rank += 1
        c += 1
    return rank


def _integral_rows(a: np.ndarray) -> list[list[int]]:
    out = []
    for row in a.tolist():
        den = reduce(lambda x, y: x * y // gcd(x, y), (Fraction(x).denominator for x in row), 1)
        out.append([int(Fraction(x) * den) for x in row])
    return out


def rank_array(a: np.ndarray, field: FieldSpec) -> int:
    if a.shape[0] == 0 or a.shape[1] == 0:
        return 0
    if field.is_rational:
        return _bareiss_rank(_integral_rows(a), a.shape[1])
    return len(rref_array(a, field)[1])


def rank(m: Matrix) -> int:
    """Rank over the matrix's field."""
    return rank_array(m.array, m.field)


def nullspace_array(a: np.ndarray, field: FieldSpec) -> np.ndarray:
    """Columns spanning ``{v : a v = 0}``, one per free column of the RREF."""
    rows, cols = a.shape
    if rows == 0:
        r, piv = a, []
    else:
        r, piv = rref_array(a, field)
    free = [c for c in range(cols) if c not in set(piv)]
    if field.is_rational:
        out = np.empty((cols, len(free)), dtype=object)
        out.fill(Fraction(0))
    else:
        out = np.zeros((cols, len(free)), dtype=np.int64)
    p = field.characteristic
    for k, f in enumerate(free):
        out[f, k] = field.one()
        for i, pc in enumerate(piv):
            x = r[i, f]
            if x != 0:
                out[pc, k] = -x if field.is_rational else (-int(x)) % p
    return out


def nullspace_basis(m: Matrix) -> list[Matrix]:
    """Basis of the right kernel, as ``cols x 1`` matrices in echelon order."""
    ns = nullspace_array(m.array, m.field)
    return [Matrix._wrap(ns[:, [k]].copy(), m.field) for k in range(ns.shape[1])]


def inverse_array(a: np.ndarray, field: FieldSpec) -> np.ndarray:
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"not square: {a.shape}")
    aug = np.concatenate([a, Matrix.identity(n, field).array], axis=1)
    r, piv = rref_array(aug, field)
    if piv[:n] != list(range(n)) or (len(piv) > n and piv[n] < n):
        raise ValueError("matrix is singular")
    return r[:, n:].copy()


def inverse(m: Matrix) -> Matrix:
    return Matrix._wrap(inverse_array(m.array, m.field), m.field)


def sparse_rank(columns: Sequence[dict[int, int]], field: FieldSpec) -> int:
    """Rank of a sparse matrix given as a list of ``{row: value}`` columns.

    Columns are reduced against earlier pivots keyed by their lowest row; unit
    pivots are exact over both GF(p) and the rationals, other pivots fall back
    to field division.
    """
    if field.is_rational:
        one = Fraction(1)
        norm = Fraction
    else:
        p = field.characteristic
        one = 1
        norm = lambda x: int(x) % p  # noqa: E731
    pivots: dict[int, dict[int, object]] = {}
    r = 0
    for col in columns:
        v = {k: norm(x) for k, x in col.items() if norm(x) != 0}
        while v:
            low = max(v)
            pcol = pivots.get(low)
            if pcol is None:
                c = v[low]
                if c != one:
                    ci = field.inv(c)
                    v = {k: norm(x * ci) for k, x in v.items()}
                pivots[low] = v
                r += 1
                break
            f = v[low]
            for k, x in pcol.items():
                y = norm(v.get(k, 0) - f * x)
                if y == 0:
                    v.pop(k, None)
                else:
                    v[k] = y
    return r


def from_rows(rows: Iterable[Iterable], field: FieldSpec = GF2, cols: int | None = None) -> Matrix:
    """Build a matrix from nested rows; ``cols`` fixes the width of an empty list."""
    rows = [list(r) for r in rows]
    if not rows:
        return Matrix.zeros(0, cols or 0, field)
    return Matrix(rows, field)
