import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from indecomp.construction import build_candy, build_primal, build_primal_nd, suspension
from indecomp.field_linalg import GF2, QQ, FieldSpec, Matrix, inverse_array, mul_arrays, rank
from indecomp.grid_module import (Affine, AffineEmbed, AxisEmbed, Explicit, GridModule, StackDiagram,
                                  barcode_of_1d, embed_last, hyperplane_restrict, iso_barcode_eq,
                                  realize, rectangle_barcode, restrict, stack, translate, unstack,
                                  unstack_raw)
from indecomp.rect_algebra import Barcode

I = Barcode.intervals


@st.composite
def barcodes_1d(draw, max_bars=6, lo=0, hi=8):
    n = draw(st.integers(1, max_bars))
    bars = []
    for _ in range(n):
        b = draw(st.integers(lo, hi))
        d = draw(st.integers(b, hi))
        bars.append((b, d))
    return I(bars)


@st.composite
def barcodes_2d(draw, max_bars=4, hi=5):
    n = draw(st.integers(1, max_bars))
    bars = []
    for _ in range(n):
        b = (draw(st.integers(0, hi)), draw(st.integers(0, hi)))
        d = (draw(st.integers(b[0], hi)), draw(st.integers(b[1], hi)))
        bars.append((b, d))
    return Barcode.of(bars)


def test_invalid_arrow_shape_rejected():
    with pytest.raises(ValueError):
        GridModule(1, {(0,): 1, (1,): 2}, {((0,), 0): [[1]]})


def test_validator_catches_noncommuting_square():
    m = GridModule(2, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
                   {((0, 0), 0): [[1]], ((0, 0), 1): [[1]], ((1, 0), 1): [[1]], ((0, 1), 0): [[0]]})
    assert not m.is_valid()


def test_validator_enforces_zero_corner():
    # (1, 0) is outside the support, so the path through (0, 1) must vanish
    m = GridModule(2, {(0, 0): 1, (0, 1): 1, (1, 1): 1},
                   {((0, 0), 1): [[1]], ((0, 1), 0): [[1]]})
    assert not m.is_valid()
    ok = GridModule(2, {(0, 0): 1, (0, 1): 1, (1, 1): 1},
                    {((0, 0), 1): [[1]], ((0, 1), 0): [[0]]})
    assert ok.is_valid()


def test_single_row_stack():
    m = stack(StackDiagram((I([(0, 2)]),), ()))
    assert m.fibers == {(0, 0): 1, (1, 0): 1, (2, 0): 1}
    assert all(a == Matrix([[1]]) for a in m.arrows.values())


def test_two_point_candy_dimension_pattern():
    m = stack(build_candy(I([(-1, -1), (1, 1)])))
    # V' row: I[-1,3] and I[1,5] overlap on [1,3]
    assert [m.fiber((x, 2)) for x in range(-1, 6)] == [1, 1, 2, 2, 2, 1, 1]
    assert m.fiber((0, 3)) == 0
    assert m.is_valid()


@given(barcodes_1d(), st.sampled_from([GF2, FieldSpec(5)]))
def test_stack_unstack_roundtrip_primal(v, field):
    s = build_primal(v, field)
    m = stack(s, field=field)
    assert m.is_valid()
    back, base = unstack(m)
    assert base == 0
    assert back.rows == s.rows
    assert back.morphisms == s.morphisms


@given(barcodes_1d(max_bars=4, lo=-3, hi=4))
def test_stack_unstack_roundtrip_candy(v):
    s = build_candy(v)
    back, _ = unstack(stack(s))
    assert back == s


@settings(max_examples=30)
@given(barcodes_2d(max_bars=3, hi=3))
def test_stack_unstack_roundtrip_nd(v):
    s = build_primal_nd(v)
    m = stack(s)
    assert m.is_valid()
    back, _ = unstack(m)
    assert back == s


def test_unstack_rejects_nonstandard_module():
    # a rank-one non-identity arrow inside a row is not in bar basis form
    m = GridModule(2, {(0, 0): 2, (1, 0): 2}, {((0, 0), 0): [[1, 1], [0, 1]]})
    with pytest.raises(ValueError):
        unstack(m)


def test_unstack_raw_single_row():
    m = stack(StackDiagram((I([(0, 2)]),), ()))
    rows = unstack_raw(m)
    assert len(rows) == 1
    v, row, conn = rows[0]
    assert row == realize(I([(0, 2)])) and conn == {}


@given(barcodes_1d(max_bars=8, hi=12))
def test_barcode_of_realize_roundtrip(v):
    assert barcode_of_1d(realize(v)) == v


@given(barcodes_1d(max_bars=5, hi=6), st.integers(0, 10 ** 6))
def test_barcode_invariant_under_change_of_basis(v, seed):
    m = realize(v)
    rng = np.random.default_rng(seed)
    p = 5
    field = FieldSpec(p)
    m = GridModule(1, m.fibers, {k: Matrix(a.array, field) for k, a in m.arrows.items()}, field)
    basis = {}
    for x, f in m.fibers.items():
        while True:
            g = rng.integers(0, p, size=(f, f))
            if rank(Matrix(g, field)) == f:
                break
        basis[x] = g
    arrows = {}
    for (x, k), a in m.arrows.items():
        y = (x[0] + 1,)
        arrows[(x, k)] = Matrix(mul_arrays(mul_arrays(basis[y], a.array, field),
                                           inverse_array(basis[x], field), field), field)
    assert barcode_of_1d(GridModule(1, m.fibers, arrows, field)) == v


def test_barcode_of_1d_examples():
    assert barcode_of_1d(GridModule(1, {})) == Barcode(1, ())
    m = GridModule(1, {(0,): 1, (1,): 1}, {((0,), 0): [[0]]})
    assert barcode_of_1d(m) == I([(0, 0), (1, 1)])


@given(barcodes_2d(max_bars=4, hi=4))
def test_rectangle_barcode_roundtrip_2d(v):
    assert rectangle_barcode(realize(v)) == v


def test_iso_barcode_eq():
    assert iso_barcode_eq(I([(0, 1), (0, 1)]), I([(0, 1), (0, 1)]))
    assert iso_barcode_eq(I([(2, 3), (0, 1)]), I([(0, 1), (2, 3)]))
    assert not iso_barcode_eq(I([(0, 1)]), I([(0, 2)]))
    with pytest.raises(ValueError):
        iso_barcode_eq(I([(0, 1)]), Barcode.of([((0, 0), (1, 1))]))


@given(barcodes_1d())
def test_primal_v_row_restricts_to_input(v):
    m = stack(build_primal(v))
    r = restrict(m, Affine((0, 3), (1, 0)))
    assert barcode_of_1d(r) == v


def test_restrict_outside_support_is_empty():
    m = stack(build_primal(I([(0, 1)])))
    assert restrict(m, Affine((0, 50), (1, 0))).is_zero()
    assert hyperplane_restrict(m, AxisEmbed(1, -5)).is_zero()


def _pointwise_restriction(m, line, ts):
    """Compose arrows cell by cell, moving along axis 1 first (opposite of path_map)."""
    fibers, arrows = {}, {}
    for t in ts:
        if m.fiber(line(t)):
            fibers[(t,)] = m.fiber(line(t))
    for t in ts:
        x, y = line(t), line(t + 1)
        if (t,) in fibers and (t + 1,) in fibers:
            arrows[((t,), 0)] = m.path_map(x, y, order=[1, 0])
    return GridModule(1, fibers, arrows, m.field)


def test_diagonal_restriction_of_single_bar_candy():
    m = stack(build_candy(I([(0, 0)])))
    line = Affine((0, 0), (1, 1))
    r = restrict(m, line)
    oracle = _pointwise_restriction(m, line, range(-3, 10))
    assert r == oracle
    assert barcode_of_1d(r) == barcode_of_1d(oracle)


@given(barcodes_1d(max_bars=4, hi=5), st.integers(0, 10 ** 6))
def test_restriction_is_path_independent(v, seed):
    m = stack(build_candy(v))
    rng = np.random.default_rng(seed)
    lo, hi = m.bbox()
    base = tuple(int(rng.integers(l - 2, h + 1)) for l, h in zip(lo, hi))
    step = (int(rng.integers(0, 3)), int(rng.integers(1, 3)))
    line = Affine(base, step)
    ts = range(-20, 20)
    assert restrict(m, line) == _pointwise_restriction(m, line, ts)


def test_explicit_line_restriction():
    m = stack(build_candy(I([(0, 1), (1, 1)])))
    pts = [(0, 3), (1, 3), (1, 4), (3, 5)]
    r = restrict(m, Explicit(tuple(pts)))
    for t, p in enumerate(pts):
        assert r.fiber((t,)) == m.fiber(p)
    with pytest.raises(ValueError):
        Explicit(((0, 0), (0, 0)))
    with pytest.raises(ValueError):
        Explicit(((1, 0), (0, 1)))


@given(barcodes_2d(max_bars=3, hi=3))
def test_slice_of_nd_primal_returns_input(v):
    m = stack(build_primal_nd(v))
    assert rectangle_barcode(hyperplane_restrict(m, AxisEmbed(2, 3))) == v


def test_affine_embed_matches_axis_slice_and_path_oracle():
    v = Barcode.of([((0, 0), (1, 2)), ((1, 1), (2, 2))])
    m = stack(suspension(v))
    a = hyperplane_restrict(m, AxisEmbed(2, 3))
    b = hyperplane_restrict(m, AffineEmbed((0, 0, 3), ((1, 0, 0), (0, 1, 0))))
    assert a == b
    # a tilted plane: compare every arrow with an explicit path composite
    h = AffineEmbed((0, 0, 0), ((1, 0, 1), (0, 1, 0)))
    r = hyperplane_restrict(m, h)
    for (p, k), mat in r.arrows.items():
        q = tuple(v + (1 if i == k else 0) for i, v in enumerate(p))
        assert mat == m.path_map(h(p), h(q), order=[2, 1, 0])
    with pytest.raises(ValueError):
        AffineEmbed((0, 0, 0), ((1, 0, 0), (2, 0, 0)))


def test_translate_and_embed():
    m = stack(build_primal(I([(0, 2), (1, 1)])))
    assert translate(m, (0, 0)) == m
    t = translate(m, (3, -2))
    assert translate(t, (-3, 2)) == m
    e = embed_last(m, 4)
    assert e.dim == 3 and all(x[2] == 4 for x in e.fibers)
    assert e.is_valid()


def test_rational_field_stack():
    v = I([(0, 1), (0, 1), (1, 3)])
    m = stack(build_primal(v, QQ), field=QQ)
    assert m.field == QQ and m.is_valid()
    assert barcode_of_1d(restrict(m, Affine((0, 3), (1, 0)))) == v
