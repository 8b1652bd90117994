"""JSON documents for barcodes and grid modules.

Both formats are integer-only and serialized canonically (sorted keys, bars
in canonical order, points lexicographic, arrows by source then axis), so the
same object always produces the same bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .field_linalg import FieldSpec, Matrix
from .grid_module import GridModule
from .rect_algebra import Barcode, Rectangle


class FormatError(ValueError):
    pass


def _int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{what} must be an integer, got {x!r}")
    return x


def _vec(x, n, what):
    if isinstance(x, int) and not isinstance(x, bool) and n == 1:
        return (x,)
    if not isinstance(x, list) or len(x) != n:
        raise FormatError(f"{what} must be a list of {n} integers, got {x!r}")
    return tuple(_int(v, what) for v in x)


def barcode_to_dict(bc: Barcode) -> dict:
    return {"dim": bc.dim, "bars": [{"b": list(r.b), "d": list(r.d)} for r in bc]}


def barcode_from_dict(doc) -> Barcode:
    if not isinstance(doc, dict) or "dim" not in doc or "bars" not in doc:
        raise FormatError("barcode document needs 'dim' and 'bars'")
    n = _int(doc["dim"], "dim")
    if n < 1:
        raise FormatError("dim must be positive")
    if not isinstance(doc["bars"], list):
        raise FormatError("'bars' must be a list")
    bars = []
    for i, bar in enumerate(doc["bars"]):
        if not isinstance(bar, dict) or "b" not in bar or "d" not in bar:
            raise FormatError(f"bar {i} needs 'b' and 'd'")
        b = _vec(bar["b"], n, f"bars[{i}].b")
        d = _vec(bar["d"], n, f"bars[{i}].d")
        try:
            bars.append(Rectangle(b, d))
        except ValueError as e:
            raise FormatError(f"bar {i}: {e}") from None
    return Barcode(n, tuple(bars))


def _entry(x):
    if isinstance(x, Fraction):
        if x.denominator != 1:
            raise FormatError("module files hold integer entries only")
        return int(x.numerator)
    return int(x)


def module_to_dict(m: GridModule) -> dict:
    points = [{"coord": list(x), "fiber_dim": m.fibers[x]} for x in sorted(m.fibers)]
    arrows = []
    for (x, k) in sorted(m.arrows):
        a = m.arrows[(x, k)]
        arrows.append({"from": list(x), "axis": k, "matrix": [_entry(v) for v in a.entries()]})
    return {"dim": m.dim, "field": m.field.characteristic, "points": points, "arrows": arrows}


def module_from_dict(doc) -> GridModule:
    if not isinstance(doc, dict):
        raise FormatError("module document must be an object")
    for key in ("dim", "field", "points", "arrows"):
        if key not in doc:
            raise FormatError(f"module document needs '{key}'")
    n = _int(doc["dim"], "dim")
    try:
        field = FieldSpec(_int(doc["field"], "field"))
    except ValueError as e:
        raise FormatError(str(e)) from None
    fibers = {}
    for i, p in enumerate(doc["points"]):
        if not isinstance(p, dict):
            raise FormatError(f"points[{i}] must be an object")
        x = _vec(p.get("coord"), n, f"points[{i}].coord")
        fibers[x] = _int(p.get("fiber_dim"), f"points[{i}].fiber_dim")
    arrows = {}
    for i, a in enumerate(doc["arrows"]):
        if not isinstance(a, dict):
            raise FormatError(f"arrows[{i}] must be an object")
        x = _vec(a.get("from"), n, f"arrows[{i}].from")
        k = _int(a.get("axis"), f"arrows[{i}].axis")
        if not 0 <= k < n:
            raise FormatError(f"arrows[{i}].axis out of range")
        y = tuple(v + (1 if j == k else 0) for j, v in enumerate(x))
        entries = a.get("matrix")
        if not isinstance(entries, list):
            raise FormatError(f"arrows[{i}].matrix must be a list")
        shape = (fibers.get(y, 0), fibers.get(x, 0))
        if len(entries) != shape[0] * shape[1]:
            raise FormatError(f"arrows[{i}].matrix has {len(entries)} entries, expected {shape[0] * shape[1]}")
        arrows[(x, k)] = Matrix([_int(v, "matrix entry") for v in entries], field, shape=shape)
    try:
        return GridModule(n, fibers, arrows, field)
    except ValueError as e:
        raise FormatError(str(e)) from None


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON: {e}") from None


def read_barcode(path) -> Barcode:
    with open(path) as fh:
        return barcode_from_dict(loads(fh.read()))


def read_module(path) -> GridModule:
    with open(path) as fh:
        return module_from_dict(loads(fh.read()))


def write_text(path, text: str):
    """Write via a temporary file and rename, so readers never see a partial file."""
    import os
    import tempfile

    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
