"""Finite-support representations of the grid Z^n.

A :class:`GridModule` stores a fiber dimension for each support point and one
matrix per unit arrow between support points.  Maps into or out of points
outside the support are zero, so a square with a missing corner still imposes
that the surviving composite vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from typing import Sequence, Union

import numpy as np

from .field_linalg import GF2, FieldSpec, Matrix, mul_arrays, rank_array
from .rect_algebra import (Barcode, Point, Rectangle, RectMatrix, as_point, hom_dim, leq,
                           realize_morphism)

__all__ = [
    "GridModule",
    "StackDiagram",
    "Affine",
    "Explicit",
    "AxisEmbed",
    "AffineEmbed",
    "realize",
    "stack",
    "unstack_raw",
    "unstack",
    "translate",
    "embed_last",
    "restrict",
    "hyperplane_restrict",
    "barcode_of_1d",
    "rectangle_barcode",
    "iso_barcode_eq",
    "direct_sum",
]


def _unit(n: int, k: int) -> Point:
    return tuple(1 if i == k else 0 for i in range(n))


def _add(x: Sequence[int], y: Sequence[int]) -> Point:
    return tuple(a + b for a, b in zip(x, y))


class CommutativityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GridModule:
    """Finite-support representation of (Z^n, <=) over a field.

    ``arrows[(x, k)]`` is the ``fiber(x + e_k) x fiber(x)`` matrix of the unit
    arrow along axis ``k``.  Every arrow between two support points is present
    (zero matrices are filled in), and points with fiber 0 are dropped.
    """

    dim: int
    fibers: dict
    arrows: dict = dc_field(default_factory=dict)
    field: FieldSpec = GF2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("ambient dimension must be positive")
        fibers = {as_point(x): int(v) for x, v in self.fibers.items() if int(v) > 0}
        for x, v in fibers.items():
            if len(x) != self.dim:
                raise ValueError(f"point {x} does not have dimension {self.dim}")
        arrows = {}
        for (x, k), mat in self.arrows.items():
            x = as_point(x)
            y = _add(x, _unit(self.dim, k))
            if x not in fibers or y not in fibers:
                if isinstance(mat, Matrix) and not mat.is_zero():
                    raise ValueError(f"nonzero arrow {x} -> {y} leaves the support")
                continue
            if not isinstance(mat, Matrix):
                mat = Matrix(mat, self.field, shape=(fibers[y], fibers[x]))
            if mat.field != self.field:
                raise ValueError(f"arrow at {x} axis {k} is over {mat.field}, module over {self.field}")
            if mat.shape != (fibers[y], fibers[x]):
                raise ValueError(f"arrow at {x} axis {k} has shape {mat.shape}, "
                                 f"expected {(fibers[y], fibers[x])}")
            arrows[(x, int(k))] = mat
        for x in fibers:
            for k in range(self.dim):
                y = _add(x, _unit(self.dim, k))
                if y in fibers and (x, k) not in arrows:
                    arrows[(x, k)] = Matrix.zeros(fibers[y], fibers[x], self.field)
        object.__setattr__(self, "fibers", fibers)
        object.__setattr__(self, "arrows", arrows)

    # -- basic accessors -------------------------------------------------

    def fiber(self, x: Sequence[int]) -> int:
        return self.fibers.get(as_point(x), 0)

    def support(self) -> set[Point]:
        return set(self.fibers)

    def total_dimension(self) -> int:
        return sum(self.fibers.values())

    def is_zero(self) -> bool:
        return not self.fibers

    def bbox(self) -> tuple[Point, Point]:
        if not self.fibers:
            raise ValueError("zero module has no bounding box")
        pts = np.array(list(self.fibers))
        return tuple(int(v) for v in pts.min(axis=0)), tuple(int(v) for v in pts.max(axis=0))

    def arrow(self, x: Sequence[int], k: int) -> Matrix:
        """Unit arrow from ``x`` along axis ``k`` (zero-shaped off the support)."""
        x = as_point(x)
        m = self.arrows.get((x, k))
        if m is not None:
            return m
        y = _add(x, _unit(self.dim, k))
        return Matrix.zeros(self.fiber(y), self.fiber(x), self.field)

    def path_map(self, x: Sequence[int], y: Sequence[int], order: Sequence[int] | None = None) -> Matrix:
        """Composite of unit arrows along a monotone lattice path from ``x`` to ``y``.

        The path exhausts the axes in ``order`` (default ``0, 1, ...``).
        """
        x, y = as_point(x), as_point(y)
        if not leq(x, y):
            raise ValueError(f"no morphism {x} -> {y}")
        order = range(self.dim) if order is None else order
        cur = Matrix.identity(self.fiber(x), self.field).array
        p = list(x)
        for k in order:
            while p[k] < y[k]:
                a = self.arrow(tuple(p), k).array
                cur = mul_arrays(a, cur, self.field)
                p[k] += 1
        return Matrix(cur, self.field, shape=(self.fiber(y), self.fiber(x)))

    # -- validation ------------------------------------------------------

    def commutativity_violations(self) -> list[tuple[Point, int, int]]:
        bad = []
        for x in sorted(self.fibers):
            for k in range(self.dim):
                for l in range(k + 1, self.dim):
                    xk = _add(x, _unit(self.dim, k))
                    xl = _add(x, _unit(self.dim, l))
                    top = _add(xk, _unit(self.dim, l))
                    if top not in self.fibers:
                        continue
                    p1 = mul_arrays(self.arrow(xk, l).array, self.arrow(x, k).array, self.field)
                    p2 = mul_arrays(self.arrow(xl, k).array, self.arrow(x, l).array, self.field)
                    if not np.array_equal(p1, p2):
                        bad.append((x, k, l))
        return bad

    def validate(self) -> "GridModule":
        bad = self.commutativity_violations()
        if bad:
            raise CommutativityError(f"{len(bad)} non-commuting unit squares, first at {bad[0]}")
        return self

    def is_valid(self) -> bool:
        return not self.commutativity_violations()

    # -- equality --------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, GridModule):
            return NotImplemented
        return (self.dim == other.dim and self.field == other.field
                and self.fibers == other.fibers and self.arrows == other.arrows)

    def __repr__(self):
        return (f"GridModule(dim={self.dim}, field={self.field}, support={len(self.fibers)}, "
                f"total_dim={self.total_dimension()})")


@dataclass(frozen=True)
class StackDiagram:
    """Chain of barcodes joined by morphisms, ``morphisms[k]: rows[k] -> rows[k+1]``.

    When stacked, row ``k`` sits at last coordinate ``base + k``.
    """

    rows: tuple
    morphisms: tuple

    def __post_init__(self):
        rows, mors = tuple(self.rows), tuple(self.morphisms)
        if not rows:
            raise ValueError("a stack diagram needs at least one row")
        if len(mors) != len(rows) - 1:
            raise ValueError(f"{len(rows)} rows need {len(rows) - 1} morphisms, got {len(mors)}")
        dim = rows[0].dim
        for r in rows:
            if r.dim != dim:
                raise ValueError("rows differ in ambient dimension")
        for k, f in enumerate(mors):
            if f.source != rows[k] or f.target != rows[k + 1]:
                raise ValueError(f"morphism {k} does not map row {k} to row {k + 1}")
        if len({f.field for f in mors}) > 1:
            raise ValueError("morphisms over different fields")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "morphisms", mors)

    @property
    def dim(self) -> int:
        return self.rows[0].dim

    @property
    def field(self) -> FieldSpec:
        return self.morphisms[0].field if self.morphisms else GF2

    def __len__(self):
        return len(self.rows)


def _row_points(bc: Barcode) -> dict[Point, list[int]]:
    pts: dict[Point, list[int]] = {}
    for i, r in enumerate(bc):
        for x in r.points():
            pts.setdefault(x, []).append(i)
    return pts


def _selection(rows_idx: list[int], cols_idx: list[int], field: FieldSpec) -> Matrix:
    a = Matrix.zeros(len(rows_idx), len(cols_idx), field).array.copy()
    pos = {b: j for j, b in enumerate(cols_idx)}
    for i, b in enumerate(rows_idx):
        j = pos.get(b)
        if j is not None:
            a[i, j] = field.one()
    return Matrix(a, field)


def _realize_into(bc: Barcode, embed, field: FieldSpec, fibers: dict, arrows: dict,
                  row_axes: int):
    pts = _row_points(bc)
    for x, idx in pts.items():
        X = embed(x)
        fibers[X] = len(idx)
        for k in range(row_axes):
            y = _add(x, _unit(row_axes, k))
            if y in pts:
                arrows[(X, k)] = _selection(pts[y], idx, field)
    return pts


def realize(bc: Barcode, field: FieldSpec = GF2) -> GridModule:
    """The module of a rectangle barcode, in the per-point bar basis."""
    fibers: dict = {}
    arrows: dict = {}
    _realize_into(bc, lambda x: x, field, fibers, arrows, bc.dim)
    return GridModule(bc.dim, fibers, arrows, field)


def stack(s: StackDiagram, base: int = 0, field: FieldSpec | None = None) -> GridModule:
    """Assemble a stack diagram into a grid module of one higher dimension.

    The stacking axis is the last coordinate and row ``k`` sits at ``base + k``,
    so every morphism points up the stack.
    """
    field = field or s.field
    n = s.dim
    fibers: dict = {}
    arrows: dict = {}
    row_pts = []
    for k, bc in enumerate(s.rows):
        h = base + k
        row_pts.append(_realize_into(bc, lambda x, h=h: x + (h,), field, fibers, arrows, n))
    for k, f in enumerate(s.morphisms):
        if f.field != field:
            f = RectMatrix(f.source, f.target, Matrix(f.scalars.array, field))
        lo, hi = row_pts[k], row_pts[k + 1]
        for x in lo:
            if x in hi:
                arrows[(x + (base + k,), n)] = realize_morphism(f, x)
    return GridModule(n + 1, fibers, arrows, field)


def _drop(x: Point, axis: int) -> Point:
    return x[:axis] + x[axis + 1:]


def unstack_raw(m: GridModule, axis: int | None = None):
    """Slice ``m`` along ``axis`` (default last) into lower-dimensional rows.

    Returns ``[(value, row_module, connecting)]`` for every value in the
    bounding range, where ``connecting`` maps a row point to the matrix from
    this row to the next one.
    """
    if m.dim < 2:
        raise ValueError("unstacking needs ambient dimension at least 2")
    axis = m.dim - 1 if axis is None else axis
    lo, hi = m.bbox()
    out = []
    other = [k for k in range(m.dim) if k != axis]
    for v in range(lo[axis], hi[axis] + 1):
        fibers = {_drop(x, axis): d for x, d in m.fibers.items() if x[axis] == v}
        arrows = {}
        for (x, k), mat in m.arrows.items():
            if x[axis] == v and k != axis:
                arrows[(_drop(x, axis), other.index(k))] = mat
        conn = {}
        for (x, k), mat in m.arrows.items():
            if x[axis] == v and k == axis:
                conn[_drop(x, axis)] = mat
        out.append((v, GridModule(m.dim - 1, fibers, arrows, m.field), conn))
    return out


def unstack(m: GridModule) -> tuple[StackDiagram, int]:
    """Inverse of :func:`stack` for modules in stacked standard form.

    Rows are decomposed with :func:`rectangle_barcode` and the connecting
    scalars are read off at a point of each source/target intersection.
    Raises ``ValueError`` if re-stacking does not reproduce ``m`` exactly.
    """
    slices = unstack_raw(m)
    base = slices[0][0]
    rows = [rectangle_barcode(row) if not row.is_zero() else Barcode(m.dim - 1, ())
            for _, row, _ in slices]
    mors = []
    for k in range(len(rows) - 1):
        src, tgt = rows[k], rows[k + 1]
        conn = slices[k][2]
        sc = Matrix.zeros(len(tgt), len(src), m.field).array.copy()
        for i, s in enumerate(src):
            for j, t in enumerate(tgt):
                if not hom_dim(s, t):
                    continue
                x = s.b  # in s and t whenever the Hom is nonzero
                mat = conn.get(x)
                if mat is None:
                    continue
                ci = src.bars_at(x).index(i)
                rj = tgt.bars_at(x).index(j)
                sc[j, i] = mat.array[rj, ci]
        mors.append(RectMatrix(src, tgt, Matrix(sc, m.field)))
    s = StackDiagram(tuple(rows), tuple(mors))
    if stack(s, base, m.field) != m:
        raise ValueError("module is not in stacked standard form")
    return s, base


def translate(m: GridModule, offset: Sequence[int]) -> GridModule:
    off = as_point(offset)
    if len(off) != m.dim:
        raise ValueError("offset dimension mismatch")
    return GridModule(m.dim, {_add(x, off): d for x, d in m.fibers.items()},
                      {(_add(x, off), k): a for (x, k), a in m.arrows.items()}, m.field)


def embed_last(m: GridModule, value: int = 0) -> GridModule:
    """Raise the dimension by one, fixing the new last coordinate."""
    return GridModule(m.dim + 1, {x + (value,): d for x, d in m.fibers.items()},
                      {(x + (value,), k): a for (x, k), a in m.arrows.items()}, m.field)


def direct_sum(a: GridModule, b: GridModule) -> GridModule:
    """Pointwise direct sum, with ``a``'s basis first at shared points."""
    if a.dim != b.dim or a.field != b.field:
        raise ValueError("direct sum needs equal dimension and field")
    field = a.field
    fibers = {x: a.fiber(x) + b.fiber(x) for x in a.support() | b.support()}
    arrows = {}
    for x in fibers:
        for k in range(a.dim):
            y = _add(x, _unit(a.dim, k))
            if y not in fibers:
                continue
            blk = Matrix.zeros(fibers[y], fibers[x], field).array.copy()
            ay, ax = a.fiber(y), a.fiber(x)
            blk[:ay, :ax] = a.arrow(x, k).array
            blk[ay:, ax:] = b.arrow(x, k).array
            arrows[(x, k)] = Matrix(blk, field)
    return GridModule(a.dim, fibers, arrows, field)


# -- lines and hyperplanes ---------------------------------------------------


@dataclass(frozen=True)
class Affine:
    """Line ``t -> base + t * step`` with a nonzero nonnegative step."""

    base: Point
    step: Point

    def __post_init__(self):
        b, s = as_point(self.base), as_point(self.step)
        if len(b) != len(s):
            raise ValueError("base and step differ in dimension")
        if any(v < 0 for v in s) or not any(s):
            raise ValueError(f"step must be nonnegative and nonzero, got {s}")
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "step", s)

    @property
    def ambient(self) -> int:
        return len(self.base)

    def __call__(self, t) -> Point:
        t = t[0] if isinstance(t, tuple) else t
        return tuple(b + t * s for b, s in zip(self.base, self.step))

    def preimage(self, y: Point):
        t = None
        for b, s, v in zip(self.base, self.step, y):
            if s == 0:
                if v != b:
                    return None
            else:
                if (v - b) % s:
                    return None
                tt = (v - b) // s
                if t is not None and tt != t:
                    return None
                t = tt
        return (t,)


@dataclass(frozen=True)
class Explicit:
    """Line through a strictly increasing list of points, indexed ``0..len-1``."""

    points: tuple

    def __post_init__(self):
        pts = tuple(as_point(p) for p in self.points)
        if not pts:
            raise ValueError("explicit line needs at least one point")
        for p, q in zip(pts, pts[1:]):
            if not leq(p, q) or p == q:
                raise ValueError(f"points must be strictly increasing: {p} then {q}")
        object.__setattr__(self, "points", pts)

    @property
    def ambient(self) -> int:
        return len(self.points[0])

    def __call__(self, t) -> Point:
        t = t[0] if isinstance(t, tuple) else t
        return self.points[t]

    def preimage(self, y: Point):
        try:
            return (self.points.index(y),)
        except ValueError:
            return None


Line = Union[Affine, Explicit]


@dataclass(frozen=True)
class AxisEmbed:
    """Hyperplane ``p -> p`` with ``value`` inserted at ``missing_axis``."""

    missing_axis: int
    value: int

    def __call__(self, p: Point) -> Point:
        p = as_point(p)
        return p[:self.missing_axis] + (self.value,) + p[self.missing_axis:]

    def preimage(self, y: Point):
        if y[self.missing_axis] != self.value:
            return None
        return _drop(y, self.missing_axis)


@dataclass(frozen=True)
class AffineEmbed:
    """Hyperplane ``p -> base + sum_k p_k * images[k]``."""

    base: Point
    images: tuple

    def __post_init__(self):
        b = as_point(self.base)
        imgs = tuple(as_point(v) for v in self.images)
        if not imgs or any(len(v) != len(b) for v in imgs):
            raise ValueError("images must be vectors of the ambient dimension")
        if any(c < 0 for v in imgs for c in v):
            raise ValueError("images must be nonnegative")
        mat = np.array(imgs, dtype=object).T
        from .field_linalg import QQ, rank_array as _rk
        if _rk(np.array([[Fraction(x) for x in r] for r in mat.tolist()], dtype=object), QQ) != len(imgs):
            raise ValueError("images must be linearly independent (injective embedding)")
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "images", imgs)

    def __call__(self, p: Point) -> Point:
        p = as_point(p)
        return tuple(b + sum(pk * v[i] for pk, v in zip(p, self.images))
                     for i, b in enumerate(self.base))

    def preimage(self, y: Point):
        # solve images^T p = y - base exactly over Q, keep integral solutions
        from .field_linalg import QQ, rref_array
        n = len(self.images)
        rhs = [Fraction(v - b) for v, b in zip(y, self.base)]
        aug = np.array([[Fraction(v[i]) for v in self.images] + [rhs[i]]
                        for i in range(len(self.base))], dtype=object)
        r, piv = rref_array(aug, QQ)
        if n in piv:
            return None
        sol = [r[i, n] for i in range(n)]
        if any(s.denominator != 1 for s in sol):
            return None
        p = tuple(int(s) for s in sol)
        return p if self(p) == tuple(y) else None


Hyperplane = Union[AxisEmbed, AffineEmbed]


def _pullback(m: GridModule, emb, k: int) -> GridModule:
    pre = {}
    for y in m.fibers:
        p = emb.preimage(y)
        if p is not None:
            pre[p] = y
    fibers = {p: m.fibers[y] for p, y in pre.items()}
    arrows = {}
    for p, y in pre.items():
        for a in range(k):
            q = _add(p, _unit(k, a))
            if q in pre:
                arrows[(p, a)] = m.path_map(y, pre[q])
    return GridModule(k, fibers, arrows, m.field)


def restrict(m: GridModule, line: Line) -> GridModule:
    """Restriction along a line, as a 1D module indexed by the line parameter."""
    if line.ambient != m.dim:
        raise ValueError(f"line lives in Z^{line.ambient}, module in Z^{m.dim}")
    return _pullback(m, line, 1)


def hyperplane_restrict(m: GridModule, h: Hyperplane) -> GridModule:
    """Restriction along a hyperplane Z^(n) -> Z^(n+1)."""
    n = m.dim - 1
    if n < 1:
        raise ValueError("hyperplane restriction needs ambient dimension at least 2")
    if isinstance(h, AxisEmbed):
        if not 0 <= h.missing_axis <= n:
            raise ValueError("missing axis out of range")
    elif len(h.base) != m.dim or len(h.images) != n:
        raise ValueError("hyperplane does not map Z^n into the module's grid")
    return _pullback(m, h, n)


# -- barcode extraction -------------------------------------------------------


def _rank_function(m: GridModule):
    """``r(x, y)`` for support points ``x <= y``, via one propagation per source."""
    field = m.field
    pts = sorted(m.fibers)
    ranks: dict[tuple[Point, Point], int] = {}
    for x in pts:
        maps = {x: Matrix.identity(m.fibers[x], field).array}
        ranks[(x, x)] = m.fibers[x]
        # points reachable from x, visited in lexicographic order so every
        # predecessor along some axis is done first
        reach = sorted(y for y in pts if leq(x, y))
        for y in reach:
            if y == x:
                continue
            for k in range(m.dim):
                if y[k] > x[k]:
                    z = tuple(v - (1 if i == k else 0) for i, v in enumerate(y))
                    if z in maps:
                        maps[y] = mul_arrays(m.arrow(z, k).array, maps[z], field)
                        break
            else:
                continue
            a = maps[y]
            if not a.any():
                ranks[(x, y)] = 0
            elif min(a.shape) == 1:
                ranks[(x, y)] = 1
            else:
                ranks[(x, y)] = rank_array(a, field)
    return ranks


def rectangle_barcode(m: GridModule) -> Barcode:
    """Barcode of a rectangle-decomposable module by Mobius inversion of ranks.

    The multiplicity of [b, d] is the alternating sum of r(b - e, d + f) over
    e, f in {0,1}^n.  For n = 1 this is the usual persistence rank formula.
    """
    if m.is_zero():
        return Barcode(m.dim, ())
    ranks = _rank_function(m)
    n = m.dim
    cubes = list(product((0, 1), repeat=n))
    bars = []
    for (b, d), r in ranks.items():
        if r == 0:
            # ranks only drop when the interval grows, so every term vanishes
            continue
        mult = 0
        for e in cubes:
            bb = tuple(v - s for v, s in zip(b, e))
            for f in cubes:
                dd = tuple(v + s for v, s in zip(d, f))
                sign = -1 if (sum(e) + sum(f)) % 2 else 1
                mult += sign * ranks.get((bb, dd), 0)
        if mult < 0:
            raise ValueError(f"negative multiplicity at {b},{d}: module is not rectangle-decomposable")
        bars.extend([Rectangle(b, d)] * mult)
    out = Barcode(n, tuple(bars))
    if out.total_dimension() != m.total_dimension():
        raise ValueError("module is not rectangle-decomposable (dimension count mismatch)")
    return out


def barcode_of_1d(m: GridModule) -> Barcode:
    if m.dim != 1:
        raise ValueError("barcode_of_1d needs a 1D module")
    return rectangle_barcode(m)


def iso_barcode_eq(a: Barcode, b: Barcode) -> bool:
    if a.dim != b.dim:
        raise ValueError("barcodes differ in dimension")
    return a.bars == b.bars
