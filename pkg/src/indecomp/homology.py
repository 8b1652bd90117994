"""Clique-cubical complexes of finite supports and their Betti numbers."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable

from .field_linalg import QQ, FieldSpec, sparse_rank
from .rect_algebra import as_point

__all__ = ["CubicalComplex", "clique_cubical", "betti", "betti_numbers", "euler_characteristic"]


@dataclass(frozen=True)
class CubicalComplex:
    """Unit cubes spanned by a support.

    ``cells[k]`` lists ``(anchor, axes)`` pairs; the cube is anchor plus any
    0/1 combination of the unit vectors in ``axes``.  ``boundaries[k]`` holds
    the columns of the boundary map from k-cells to (k-1)-cells as sparse
    ``{row: sign}`` dicts.
    """

    dim: int
    cells: tuple
    boundaries: tuple

    def count(self, k: int) -> int:
        return len(self.cells[k]) if 0 <= k < len(self.cells) else 0


def clique_cubical(support: Iterable) -> CubicalComplex:
    """Every unit cube whose corners all lie in the support, up to the ambient dimension."""
    pts = sorted({as_point(p) for p in support})
    if not pts:
        return CubicalComplex(0, ((),), ((),))
    n = len(pts[0])
    S = set(pts)
    cells: list[list] = []
    for k in range(n + 1):
        layer = []
        for axes in combinations(range(n), k):
            for x in pts:
                ok = True
                for eps in product((0, 1), repeat=k):
                    y = list(x)
                    for a, e in zip(axes, eps):
                        y[a] += e
                    if tuple(y) not in S:
                        ok = False
                        break
                if ok:
                    layer.append((x, axes))
        layer.sort()
        if not layer:
            break
        cells.append(layer)
    index = [{c: i for i, c in enumerate(layer)} for layer in cells]
    bounds: list = [[{} for _ in cells[0]]]
    for k in range(1, len(cells)):
        cols = []
        for x, axes in cells[k]:
            col = {}
            for j, a in enumerate(axes):
                face_axes = axes[:j] + axes[j + 1:]
                sign = 1 if j % 2 == 0 else -1
                top = tuple(v + (1 if i == a else 0) for i, v in enumerate(x))
                col[index[k - 1][(top, face_axes)]] = sign
                col[index[k - 1][(x, face_axes)]] = -sign
            cols.append(col)
        bounds.append(cols)
    return CubicalComplex(n, tuple(tuple(l) for l in cells), tuple(tuple(b) for b in bounds))


def _rank(c: CubicalComplex, k: int, field: FieldSpec, cache: dict) -> int:
    if k <= 0 or k >= len(c.cells):
        return 0
    if k not in cache:
        cache[k] = sparse_rank(c.boundaries[k], field)
    return cache[k]


def betti(c: CubicalComplex, k: int, field: FieldSpec = QQ, _cache: dict | None = None) -> int:
    """dim ker d_k - rank d_(k+1)."""
    cache = {} if _cache is None else _cache
    return c.count(k) - _rank(c, k, field, cache) - _rank(c, k + 1, field, cache)


def betti_numbers(c: CubicalComplex, field: FieldSpec = QQ, top: int | None = None) -> tuple[int, ...]:
    """Betti numbers in degrees ``0 .. top`` (default: the ambient dimension)."""
    top = c.dim if top is None else top
    cache: dict = {}
    return tuple(betti(c, k, field, cache) for k in range(top + 1))


def euler_characteristic(c: CubicalComplex) -> int:
    return sum((-1) ** k * len(layer) for k, layer in enumerate(c.cells))
