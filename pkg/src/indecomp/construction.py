"""Builders for indecomposable modules with prescribed restrictions.

The primal pipeline turns a barcode V into a four-row stack
``I_V -> Vbar -> V' -> V``: separate the death indices, pivot them around a
common midpoint so the middle rows become vertical, then cone off with a
single rectangle.  The dual pipeline is obtained by negating indices, and the
candy splices both around the shared row V.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

from .field_linalg import GF2, FieldSpec, Matrix
from .grid_module import (GridModule, StackDiagram, embed_last, stack, translate)
from .rect_algebra import Barcode, Point, Rectangle, RectMatrix, hom_dim, leq

__all__ = [
    "ShiftPlan",
    "ConcatPlacement",
    "separate_and_shift",
    "verticalize",
    "cone",
    "build_primal",
    "build_dual",
    "build_candy",
    "build_primal_nd",
    "build_dual_nd",
    "suspension",
    "negate_morphism",
    "candy_corners",
    "validate_candy",
    "concatenate",
    "concatenate_with_placement",
    "enumerate_barcodes",
    "universal_barcodes",
    "universal_prefix",
    "universal_prefix_layout",
    "build_n_holes",
    "hole_barcode",
    "minimal_hole_module",
    "counterexample_stack",
    "chain_across_dimensions",
]


@dataclass(frozen=True)
class ShiftPlan:
    order: tuple       # bar indices in processing order
    dpp: tuple         # d''_i, indexed like the input bars
    ell: Point
    dp: tuple          # d'_i = d''_i + ell


def _vadd(x, y):
    return tuple(a + b for a, b in zip(x, y))


def _vsub(x, y):
    return tuple(a - b for a, b in zip(x, y))


def _cmax(pts):
    return tuple(max(c) for c in zip(*pts))


def _cmin(pts):
    return tuple(min(c) for c in zip(*pts))


def _bar_map(src_bars: Sequence[Rectangle], dst: Barcode, pairs, field: FieldSpec,
             source: Barcode) -> RectMatrix:
    """RectMatrix with a 1 from ``source``'s copy of ``src_bars[i]`` to ``dst``'s copy of ``pairs[i]``.

    Repeated bars are matched in order, so a bar that appears twice maps its
    k-th copy to the k-th copy of its image.
    """
    def positions(bc: Barcode, items):
        used: dict = {}
        out = []
        for r in items:
            start = used.get(r, 0)
            idx = [i for i, s in enumerate(bc) if s == r]
            out.append(idx[start])
            used[r] = start + 1
        return out

    cols = positions(source, src_bars)
    rows = positions(dst, pairs)
    a = Matrix.zeros(len(dst), len(source), field).array.copy()
    for c, r in zip(cols, rows):
        a[r, c] = field.one()
    return RectMatrix(source, dst, Matrix(a, field))


def separate_and_shift(v: Barcode, field: FieldSpec = GF2):
    """Move death indices apart and up: returns ``(V', V' -> V, plan)``.

    Bars are handled by decreasing death (first coordinate), then decreasing
    birth, then position; each takes the smallest free first coordinate at or
    above its death.  The common shift is ``max(b + d'')`` plus twice the most
    negative birth, which keeps ``b_j + d'_j <= 2 d'_i`` for every pair even
    when indices are negative.
    """
    if len(v) == 0:
        raise ValueError("separate_and_shift needs a nonempty barcode")
    bars = list(v)
    order = sorted(range(len(bars)),
                   key=lambda i: (-bars[i].d[0], tuple(-c for c in bars[i].b), i))
    used: set[int] = set()
    dpp: list = [None] * len(bars)
    for i in order:
        c = bars[i].d[0]
        while c in used:
            c += 1
        used.add(c)
        dpp[i] = (c,) + bars[i].d[1:]
    lift = tuple(-2 * min(0, m) for m in _cmin([r.b for r in bars]))
    ell = _vadd(_cmax([_vadd(r.b, d) for r, d in zip(bars, dpp)]), lift)
    dp = [_vadd(d, ell) for d in dpp]
    shifted = [Rectangle(r.b, d) for r, d in zip(bars, dp)]
    vp = Barcode(v.dim, tuple(shifted))
    mor = _bar_map(shifted, v, bars, field, vp)
    return vp, mor, ShiftPlan(tuple(order), tuple(dpp), ell, tuple(dp))


def _condition_two(vp: Barcode) -> bool:
    for ri in vp:
        for rj in vp:
            if not leq(_vadd(rj.b, rj.d), _vadd(ri.d, ri.d)):
                return False
    return True


def verticalize(vp: Barcode, field: FieldSpec = GF2):
    """Pivot births around the common doubled midpoint ``max(b + d')``.

    Returns ``(Vbar, Vbar -> V')``.
    """
    if len(vp) == 0:
        raise ValueError("verticalize needs a nonempty barcode")
    if len({r.d[0] for r in vp}) != len(vp) or not _condition_two(vp):
        raise ValueError("input is not a separate-and-shift output "
                         "(distinct deaths and b_j + d_j <= 2 d_i required)")
    mu2 = _cmax([_vadd(r.b, r.d) for r in vp])
    pivoted = [Rectangle(_vsub(mu2, r.d), r.d) for r in vp]
    vbar = Barcode(vp.dim, tuple(pivoted))
    return vbar, _bar_map(pivoted, vp, list(vp), field, vbar)


def cone(vbar: Barcode, field: FieldSpec = GF2):
    """The rectangle ``[max b', max d']`` with a canonical map onto every bar."""
    if len(vbar) == 0:
        raise ValueError("cone needs a nonempty barcode")
    top = Rectangle(_cmax([r.b for r in vbar]), _cmax([r.d for r in vbar]))
    for r in vbar:
        if not hom_dim(top, r):
            raise ValueError(f"cone has no map onto {r}: wall inequality violated")
    src = Barcode(vbar.dim, (top,))
    ones = Matrix([[1]] * len(vbar), field)
    return top, RectMatrix(src, vbar, ones)


def build_primal(v: Barcode, field: FieldSpec = GF2) -> StackDiagram:
    """Rows ``[I_V, Vbar, V', V]``; stacked, V is the top row."""
    vp, to_v, _ = separate_and_shift(v, field)
    vbar, to_vp = verticalize(vp, field)
    top, to_vbar = cone(vbar, field)
    return StackDiagram((Barcode(v.dim, (top,)), vbar, vp, v), (to_vbar, to_vp, to_v))


def negate_morphism(f: RectMatrix) -> RectMatrix:
    """Mirror ``f: A -> B`` to ``-B -> -A`` (indices negated, scalar matrix transposed)."""
    src, tgt = f.target.negate(), f.source.negate()

    def perm(bc: Barcode, neg: Barcode):
        used: dict = {}
        out = []
        for r in bc:
            nr = r.negate()
            k = used.get(nr, 0)
            out.append([i for i, s in enumerate(neg) if s == nr][k])
            used[nr] = k + 1
        return out

    pt = perm(f.target, src)   # old target index -> new source index
    ps = perm(f.source, tgt)   # old source index -> new target index
    old = f.scalars.array
    a = Matrix.zeros(len(tgt), len(src), f.field).array.copy()
    for j in range(len(f.target)):
        for i in range(len(f.source)):
            a[ps[i], pt[j]] = old[j, i]
    return RectMatrix(src, tgt, Matrix(a, f.field))


def build_dual(v: Barcode, field: FieldSpec = GF2) -> StackDiagram:
    """Rows ``[V, V'', Vbarbar, I'_V]``: the primal stack of ``-V``, mirrored."""
    p = build_primal(v.negate(), field)
    rows = tuple(r.negate() for r in reversed(p.rows))
    mors = tuple(negate_morphism(f) for f in reversed(p.morphisms))
    return StackDiagram(rows, mors)


def _splice(v: Barcode, field: FieldSpec) -> StackDiagram:
    p = build_primal(v, field)
    d = build_dual(v, field)
    return StackDiagram(p.rows + d.rows[1:], p.morphisms + d.morphisms)


def build_candy(v: Barcode, field: FieldSpec = GF2) -> StackDiagram:
    """Seven rows ``I_V, Vbar, V', V, V'', Vbarbar, I'_V``; V sits at index 3."""
    if v.dim != 1:
        raise ValueError("candy modules are built from 1D barcodes; use suspension for nD")
    if len(v) == 0:
        raise ValueError("build_candy needs a nonempty barcode")
    return _splice(v, field)


build_primal_nd = build_primal
build_dual_nd = build_dual


def suspension(v: Barcode, field: FieldSpec = GF2) -> StackDiagram:
    """Seven-row splice for any ambient dimension; its support suspends supp(V)."""
    if len(v) == 0:
        raise ValueError("suspension needs a nonempty barcode")
    return _splice(v, field)


# -- candies and concatenation ------------------------------------------------


def candy_corners(m: GridModule) -> tuple[Point, Point]:
    """``(r, l)``: lower-right and upper-left extremal support points of a 2D module."""
    if m.dim != 2 or m.is_zero():
        raise ValueError("candy corners need a nonzero 2D module")
    pts = m.support()
    xmax = max(p[0] for p in pts)
    xmin = min(p[0] for p in pts)
    r = min((p for p in pts if p[0] == xmax), key=lambda p: p[1])
    l = max((p for p in pts if p[0] == xmin), key=lambda p: p[1])
    return r, l


def validate_candy(m: GridModule) -> tuple[Point, Point]:
    from .verify import end_dim

    r, l = candy_corners(m)
    if m.fiber(r) != 1 or m.fiber(l) != 1:
        raise ValueError(f"extremal corner fibers are {m.fiber(r)} and {m.fiber(l)}, not 1")
    d = end_dim(m).dimension
    if d != 1:
        raise ValueError(f"endomorphism ring has dimension {d}, not 1")
    return r, l


@dataclass(frozen=True)
class ConcatPlacement:
    translate: Point
    anchor_x: Point
    r_A: Point
    l_B: Point


def concatenate_with_placement(a: GridModule, b: GridModule, check: bool = True):
    """Glue candy ``b`` below and right of candy ``a`` through one new vertex.

    The vertex ``x`` sits one unit below ``a``'s lower-right corner and one
    unit left of ``b``'s (translated) upper-left corner, with identity maps to
    both.
    """
    if a.field != b.field:
        raise ValueError("operands over different fields")
    if check:
        r_a, _ = validate_candy(a)
        _, l_b = validate_candy(b)
    else:
        r_a, _ = candy_corners(a)
        _, l_b = candy_corners(b)
    x = (r_a[0], r_a[1] - 1)
    target = (x[0] + 1, x[1])
    off = _vsub(target, l_b)
    bt = translate(b, off)
    if a.support() & bt.support():
        raise ValueError("translated operands overlap")
    one = Matrix([[1]], a.field)
    fibers = dict(a.fibers)
    fibers.update(bt.fibers)
    fibers[x] = 1
    arrows = dict(a.arrows)
    arrows.update(bt.arrows)
    arrows[(x, 0)] = one
    arrows[(x, 1)] = one
    out = GridModule(2, fibers, arrows, a.field)
    return out, ConcatPlacement(off, x, r_a, target)


def concatenate(a: GridModule, b: GridModule) -> GridModule:
    return concatenate_with_placement(a, b)[0]


# -- enumeration and the universal prefix --------------------------------------


def _first_stage(bc: Barcode) -> int:
    ends = [abs(c) for r in bc for c in (r.b[0], r.d[0])]
    return max(bc.total_dimension() + 1, max(ends), 1)


def _enum_key(bc: Barcode):
    return (_first_stage(bc), bc.total_dimension(), len(bc),
            tuple((r.b[0], r.d[0]) for r in bc))


def enumerate_barcodes(stage: int) -> list[Barcode]:
    """Nonzero 1D barcodes of total dimension < stage with endpoints in [-stage, stage].

    Ordered by the first stage containing them, so each result is a prefix of
    the next one.
    """
    if stage < 1:
        raise ValueError("stage must be at least 1")
    budget = stage - 1
    ivals = [(b, d) for b in range(-stage, stage + 1) for d in range(b, stage + 1)
             if d - b + 1 <= budget]
    out = []
    for k in range(1, budget + 1):
        for combo in combinations_with_replacement(ivals, k):
            if sum(d - b + 1 for b, d in combo) <= budget:
                out.append(Barcode.intervals(combo))
    out.sort(key=_enum_key)
    return out


def _normalize(bc: Barcode) -> Barcode:
    return bc.translate((-min(r.b[0] for r in bc),))


def universal_barcodes(k: int) -> list[Barcode]:
    """First ``k`` barcodes of the enumeration up to translation (min birth 0)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    stage = 1
    while True:
        seen: list[Barcode] = []
        for bc in enumerate_barcodes(stage):
            nb = _normalize(bc)
            if nb not in seen:
                seen.append(nb)
        if len(seen) >= k:
            return seen[:k]
        stage += 1


@dataclass(frozen=True)
class UniversalLayout:
    module: GridModule
    barcodes: tuple          # L_0 .. L_{k-1}
    offsets: tuple           # translation of candy i inside the module
    middle_rows: tuple       # last coordinate of candy i's V row
    above_first: int         # last coordinate just above candy 0


def universal_prefix_layout(k: int, field: FieldSpec = GF2) -> UniversalLayout:
    """Concatenation of the candies of ``L_0 .. L_{k-1}`` with bookkeeping."""
    bcs = universal_barcodes(k)
    candies = [stack(build_candy(bc, field), field=field) for bc in bcs]
    m = candies[0]
    offsets = [(0, 0)]
    for c in candies[1:]:
        m, place = concatenate_with_placement(m, c, check=False)
        offsets.append(place.translate)
    rows = tuple(off[1] + 3 for off in offsets)
    return UniversalLayout(m, tuple(bcs), tuple(offsets), rows, 7)


def universal_prefix(k: int, field: FieldSpec = GF2) -> GridModule:
    return universal_prefix_layout(k, field).module


# -- holes -----------------------------------------------------------------------


def build_n_holes(n: int, field: FieldSpec = GF2) -> GridModule:
    """Candy of ``I[0,0] + I[2,2] + ... + I[2n,2n]``; its support has n holes."""
    if n < 0:
        raise ValueError("number of holes must be nonnegative")
    v = Barcode.intervals([(2 * i, 2 * i) for i in range(n + 1)])
    return stack(build_candy(v, field), field=field)


def hole_barcode(dim: int, holes: int) -> Barcode:
    """A rectangle barcode whose support has reduced homology only in degree dim-1.

    In 1D it is ``holes + 1`` separated points; in 2D a ladder of ``holes``
    unit-width rings sharing their sides.
    """
    if holes < 0:
        raise ValueError("number of holes must be nonnegative")
    if dim == 1:
        return Barcode.intervals([(2 * i, 2 * i) for i in range(holes + 1)])
    if dim == 2:
        if holes == 0:
            return Barcode.of([((0, 0), (0, 0))])
        w = 2 * holes
        bars = [((0, 0), (w, 0)), ((0, 2), (w, 2))]
        bars += [((2 * j, 0), (2 * j, 2)) for j in range(holes + 1)]
        return Barcode.of(bars)
    raise ValueError("hole barcodes are provided for dimensions 1 and 2")


def minimal_hole_module(field: FieldSpec = GF2) -> GridModule:
    """The 11-vertex indecomposable module whose support has one hole."""
    fibers = {
        (0, 3): 1, (1, 3): 1, (2, 3): 1,
        (0, 2): 1, (2, 2): 1,
        (0, 1): 1, (1, 1): 1, (2, 1): 2, (3, 1): 1,
        (2, 0): 1, (3, 0): 1,
    }
    X, Y = 0, 1
    arrows = {
        ((0, 3), X): [[1]],
        ((1, 3), X): [[1]],
        ((0, 2), Y): [[0]],
        ((2, 2), Y): [[1]],
        ((0, 1), X): [[1]],
        ((1, 1), X): [[1], [0]],
        ((2, 1), X): [[1, 0]],
        ((0, 1), Y): [[1]],
        ((2, 1), Y): [[0, 1]],
        ((2, 0), X): [[1]],
        ((2, 0), Y): [[1], [1]],
        ((3, 0), Y): [[1]],
    }
    return GridModule(2, fibers, {k: Matrix(v, field) for k, v in arrows.items()}, field)


def counterexample_stack(field: FieldSpec = GF2) -> StackDiagram:
    """Two rows ``I[2,2] + I[1,1] -> I[1,2] + I[1,1]`` joined by the two inclusions.

    Without the wall inequality the lower-left entry of an endomorphism's
    matrix form on the second row is left undetermined.
    """
    vbar = Barcode.intervals([(2, 2), (1, 1)])
    vp = Barcode.intervals([(1, 2), (1, 1)])
    iota = _bar_map([Rectangle.interval(2, 2), Rectangle.interval(1, 1)], vp,
                    [Rectangle.interval(1, 2), Rectangle.interval(1, 1)], field, vbar)
    return StackDiagram((vbar, vp), (iota,))


# -- chaining across dimensions ----------------------------------------------------


def _bottom_slab_min(m: GridModule, axis: int) -> Point:
    """Minimal corner of the lowest slab along ``axis``; must be a single 1-dim source."""
    lo = min(p[axis] for p in m.fibers)
    slab = [p for p in m.fibers if p[axis] == lo]
    corner = tuple(min(c) for c in zip(*slab))
    if corner not in m.fibers or m.fiber(corner) != 1:
        raise ValueError(f"bottom slab has no 1-dimensional minimal corner (got {corner})")
    return corner


def _bottom_slab_max(m: GridModule, axis: int) -> Point:
    lo = min(p[axis] for p in m.fibers)
    slab = [p for p in m.fibers if p[axis] == lo]
    corner = tuple(max(c) for c in zip(*slab))
    if corner not in m.fibers or m.fiber(corner) != 1:
        raise ValueError(f"bottom slab has no 1-dimensional maximal corner (got {corner})")
    return corner


def chain_across_dimensions(betti: Sequence[int], field: FieldSpec = GF2) -> GridModule:
    """Indecomposable (len(betti)+1)-D module whose support has Betti numbers 1, *betti.

    Piece ``T_i`` is the suspension of a barcode with a single nonzero reduced
    Betti number in degree ``i - 1``.  Each new piece sits above the previous
    result (new last coordinate >= 1) with its bottom slab's maximal corner
    directly over the source corner of the previous piece's bottom slab, and
    the two corners are joined by one identity arrow.
    """
    betti = list(betti)
    if not betti:
        raise ValueError("betti must have length at least 1")
    if any(b < 0 for b in betti):
        raise ValueError("Betti numbers must be nonnegative")
    n = len(betti) + 1
    if n > 3:
        raise ValueError("chain_across_dimensions supports ambient dimension at most 3")
    m = build_n_holes(betti[0], field)
    source = _bottom_slab_min(m, m.dim - 1)
    for i in range(1, len(betti)):
        piece = stack(suspension(hole_barcode(i + 1, betti[i]), field), field=field)
        m = embed_last(m, 0)
        p = source + (0,)
        r = _bottom_slab_max(piece, piece.dim - 1)
        off = _vsub(_vadd(p, (0,) * (piece.dim - 1) + (1,)), r)
        piece = translate(piece, off)
        if m.support() & piece.support():
            raise ValueError("chain pieces overlap")
        fibers = dict(m.fibers)
        fibers.update(piece.fibers)
        arrows = dict(m.arrows)
        arrows.update(piece.arrows)
        arrows[(p, piece.dim - 1)] = Matrix([[1]], field)
        link_target = _vadd(p, (0,) * (piece.dim - 1) + (1,))
        # any other vertical adjacency between the layers would add cells and
        # zero-composite constraints beyond the single link
        for q in m.fibers:
            up = q[:-1] + (q[-1] + 1,)
            if up in piece.fibers and q != p:
                raise ValueError(f"chain pieces touch outside the link at {q}")
        if link_target not in piece.fibers:
            raise ValueError("link target missing")
        m = GridModule(piece.dim, fibers, arrows, field)
        source = _bottom_slab_min(piece, piece.dim - 1)
    return m
