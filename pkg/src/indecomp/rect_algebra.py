"""Rectangles, barcodes and the matrix formalism for morphisms between them.

A rectangle ``[b, d]`` in Z^n is the module that is K on the box and identity
inside it.  A morphism between direct sums of rectangles is a scalar matrix
whose ``(j, i)`` entry multiplies the canonical map from bar ``i`` to bar ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .field_linalg import GF2, FieldSpec, Matrix

Point = tuple[int, ...]

__all__ = [
    "Point",
    "Rectangle",
    "Barcode",
    "RectMatrix",
    "hom_dim",
    "canonical_compose",
    "mat_compose",
    "realize_morphism",
    "is_vertical",
    "leq",
]


def leq(x: Sequence[int], y: Sequence[int]) -> bool:
    """Componentwise order on Z^n."""
    return all(a <= b for a, b in zip(x, y))


def as_point(x) -> Point:
    if isinstance(x, (int, np.integer)):
        return (int(x),)
    return tuple(int(v) for v in x)


@dataclass(frozen=True, order=True)
class Rectangle:
    b: Point
    d: Point

    def __post_init__(self):
        b, d = as_point(self.b), as_point(self.d)
        if len(b) != len(d) or not b:
            raise ValueError(f"rectangle corners must share a positive dimension: {b}, {d}")
        if not leq(b, d):
            raise ValueError(f"rectangle needs b <= d componentwise, got {b} > {d}")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @classmethod
    def interval(cls, b: int, d: int) -> "Rectangle":
        return cls((b,), (d,))

    @property
    def dim(self) -> int:
        return len(self.b)

    def contains(self, x: Sequence[int]) -> bool:
        return leq(self.b, x) and leq(x, self.d)

    def points(self):
        """Lattice points of the box, lexicographically."""
        ranges = [range(lo, hi + 1) for lo, hi in zip(self.b, self.d)]
        return _product(ranges)

    def size(self) -> int:
        n = 1
        for lo, hi in zip(self.b, self.d):
            n *= hi - lo + 1
        return n

    def translate(self, offset: Sequence[int]) -> "Rectangle":
        return Rectangle(tuple(a + o for a, o in zip(self.b, offset)),
                         tuple(a + o for a, o in zip(self.d, offset)))

    def negate(self) -> "Rectangle":
        return Rectangle(tuple(-x for x in self.d), tuple(-x for x in self.b))

    def __str__(self):
        if self.dim == 1:
            return f"I[{self.b[0]},{self.d[0]}]"
        return f"I[{self.b},{self.d}]"


def _product(ranges):
    if not ranges:
        yield ()
        return
    for x in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (x,) + rest


@dataclass(frozen=True)
class Barcode:
    """Finite multiset of same-dimension rectangles, kept in canonical order."""

    dim: int
    bars: tuple[Rectangle, ...] = ()

    def __post_init__(self):
        bars = tuple(sorted(self.bars))
        for r in bars:
            if r.dim != self.dim:
                raise ValueError(f"bar {r} does not have dimension {self.dim}")
        if self.dim < 1:
            raise ValueError("barcode dimension must be positive")
        object.__setattr__(self, "bars", bars)

    @classmethod
    def of(cls, bars: Iterable, dim: int | None = None) -> "Barcode":
        """Build from rectangles or ``(b, d)`` pairs (ints or vectors)."""
        rects = [r if isinstance(r, Rectangle) else Rectangle(*r) for r in bars]
        if dim is None:
            if not rects:
                raise ValueError("dimension of an empty barcode must be given")
            dim = rects[0].dim
        return cls(dim, tuple(rects))

    @classmethod
    def intervals(cls, pairs: Iterable[tuple[int, int]]) -> "Barcode":
        return cls(1, tuple(Rectangle.interval(b, d) for b, d in pairs))

    def __len__(self):
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def __getitem__(self, i) -> Rectangle:
        return self.bars[i]

    def bar(self, i: int) -> Rectangle:
        return self.bars[i]

    def total_dimension(self) -> int:
        return sum(r.size() for r in self.bars)

    def translate(self, offset: Sequence[int]) -> "Barcode":
        return Barcode(self.dim, tuple(r.translate(offset) for r in self.bars))

    def negate(self) -> "Barcode":
        return Barcode(self.dim, tuple(r.negate() for r in self.bars))

    def support(self) -> set[Point]:
        pts = set()
        for r in self.bars:
            pts.update(r.points())
        return pts

    def bars_at(self, x: Sequence[int]) -> list[int]:
        """Indices of the bars containing ``x``; this is the fiber basis at ``x``."""
        return [i for i, r in enumerate(self.bars) if r.contains(x)]

    def __str__(self):
        return "{" + ", ".join(str(r) for r in self.bars) + "}"


def hom_dim(src: Rectangle, tgt: Rectangle) -> int:
    """Dimension of Hom(I[a,b], I[c,d]): 1 iff c <= a <= d <= b, else 0."""
    if src.dim != tgt.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    a, b = src.b, src.d
    c, d = tgt.b, tgt.d
    return int(leq(c, a) and leq(a, d) and leq(d, b))


def canonical_compose(first: tuple[Rectangle, Rectangle],
                      second: tuple[Rectangle, Rectangle]) -> int:
    """Whether ``f(second) . f(first)`` equals the canonical map (1) or vanishes (0).

    ``first`` maps I[a,b] -> I[c,d] and ``second`` maps I[c,d] -> I[e,f]; the
    composite is supported on [a, f], so it is nonzero iff a <= f.
    """
    (s, m1), (m2, t) = first, second
    if m1 != m2:
        raise ValueError(f"factors are not composable: {m1} vs {m2}")
    if not hom_dim(s, m1) or not hom_dim(m2, t):
        raise ValueError("canonical_compose needs two nonzero canonical maps")
    return int(leq(s.b, t.d))


class RectMatrix:
    """A morphism ``source -> target`` of rectangle sums, in matrix form.

    ``scalars[j, i]`` multiplies the canonical map from ``source[i]`` to
    ``target[j]``; entries with vanishing Hom are forced to zero.
    """

    __slots__ = ("source", "target", "scalars")

    def __init__(self, source: Barcode, target: Barcode, scalars, field: FieldSpec = GF2):
        if source.dim != target.dim:
            raise ValueError("source and target barcodes differ in dimension")
        if not isinstance(scalars, Matrix):
            scalars = Matrix(np.asarray(scalars, dtype=object).reshape(len(target), len(source))
                             if len(source) and len(target) else
                             np.zeros((len(target), len(source)), dtype=np.int64), field)
        if scalars.shape != (len(target), len(source)):
            raise ValueError(f"scalar matrix has shape {scalars.shape}, "
                             f"expected {(len(target), len(source))}")
        a = scalars.array
        for j, t in enumerate(target):
            for i, s in enumerate(source):
                if a[j, i] != 0 and not hom_dim(s, t):
                    raise ValueError(f"nonzero entry ({j},{i}) but Hom({s}, {t}) = 0")
        self.source = source
        self.target = target
        self.scalars = scalars

    @property
    def field(self) -> FieldSpec:
        return self.scalars.field

    @classmethod
    def identity(cls, bc: Barcode, field: FieldSpec = GF2) -> "RectMatrix":
        return cls(bc, bc, Matrix.identity(len(bc), field))

    def __eq__(self, other):
        if not isinstance(other, RectMatrix):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.scalars == other.scalars)

    def __hash__(self):
        return hash((self.source, self.target, self.scalars))

    def __repr__(self):
        return f"RectMatrix({self.source} -> {self.target}, {self.scalars.tolist()})"


def mat_compose(g: RectMatrix, f: RectMatrix) -> RectMatrix:
    """Matrix form of ``g . f``; entries whose canonical composite vanishes drop out."""
    if f.target != g.source:
        raise ValueError("barcode mismatch: f.target != g.source")
    field = f.field
    if g.field != field:
        raise ValueError("field mismatch")
    src, mid, tgt = f.source, f.target, g.target
    fa, ga = f.scalars.array, g.scalars.array
    out = Matrix.zeros(len(tgt), len(src), field).array.copy()
    for k, t in enumerate(tgt):
        for i, s in enumerate(src):
            acc = field.zero()
            for j, m in enumerate(mid):
                if ga[k, j] == 0 or fa[j, i] == 0:
                    continue
                if canonical_compose((s, m), (m, t)):
                    acc = acc + ga[k, j] * fa[j, i]
            out[k, i] = field.scalar(acc)
    return RectMatrix(src, tgt, Matrix(out, field))


def realize_morphism(f: RectMatrix, at: Sequence[int]) -> Matrix:
    """Fiber map of ``f`` at a grid point, in the per-point bar bases.

    Rows index target bars containing the point, columns index source bars
    containing it; the shape is ``(dim target fiber, dim source fiber)``.
    """
    at = as_point(at)
    rows = f.target.bars_at(at)
    cols = f.source.bars_at(at)
    a = f.scalars.array
    return Matrix(a[np.ix_(rows, cols)] if rows and cols else
                  np.zeros((len(rows), len(cols)), dtype=np.int64), f.field)


def is_vertical(bc: Barcode) -> bool:
    """Distinct bars sharing one midpoint (compared doubled, so integral)."""
    pairs = [(r.b, r.d) for r in bc]
    if len(set(pairs)) != len(pairs):
        return False
    mids = {tuple(x + y for x, y in zip(b, d)) for b, d in pairs}
    return len(mids) <= 1
