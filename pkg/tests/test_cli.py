import json
import random

import pytest

from indecomp.cli import main, parse_line_spec
from indecomp.construction import build_candy, minimal_hole_module
from indecomp.field_linalg import FieldSpec
from indecomp.formats import (FormatError, barcode_from_dict, barcode_to_dict, dumps, module_from_dict,
                              module_to_dict)
from indecomp.grid_module import Affine, AxisEmbed, Explicit, stack
from indecomp.rect_algebra import Barcode
from indecomp.render import render_ascii, render_svg


def write_barcode(path, pairs, dim=1):
    bars = [{"b": [b] if dim == 1 else list(b), "d": [d] if dim == 1 else list(d)} for b, d in pairs]
    path.write_text(json.dumps({"dim": dim, "bars": bars}))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_barcode_format_roundtrip():
    bc = Barcode.intervals([(2, 3), (0, 1), (0, 1)])
    doc = barcode_to_dict(bc)
    assert doc["bars"][0] == {"b": [0], "d": [1]}
    assert barcode_from_dict(json.loads(dumps(doc))) == bc


def test_module_format_roundtrip():
    m = minimal_hole_module()
    doc = module_to_dict(m)
    assert [p["coord"] for p in doc["points"]] == sorted(p["coord"] for p in doc["points"])
    back = module_from_dict(json.loads(dumps(doc)))
    assert back == m
    assert dumps(module_to_dict(back)) == dumps(doc)
    q = module_from_dict(dict(doc, field=0))
    assert q.field == FieldSpec(0)


@pytest.mark.parametrize("doc", [
    {"bars": []},
    {"dim": 1, "bars": [{"b": [0]}]},
    {"dim": 1, "bars": [{"b": [3], "d": [1]}]},
    {"dim": 2, "bars": [{"b": [0], "d": [1]}]},
    {"dim": 1, "bars": [{"b": [0.5], "d": [1]}]},
])
def test_bad_barcode_documents(doc):
    with pytest.raises(FormatError):
        barcode_from_dict(doc)


def test_bad_module_documents():
    m = module_to_dict(minimal_hole_module())
    with pytest.raises(FormatError):
        module_from_dict(dict(m, field=4))
    broken = json.loads(json.dumps(m))
    broken["arrows"][0]["matrix"] = [1, 1, 1]
    with pytest.raises(FormatError):
        module_from_dict(broken)


def test_line_specs():
    assert parse_line_spec("base=(0,3);step=(1,0)") == Affine((0, 3), (1, 0))
    assert parse_line_spec("points=[(0,0),(1,0),(1,2)]") == Explicit(((0, 0), (1, 0), (1, 2)))
    assert parse_line_spec("slice axis=2 value=3") == AxisEmbed(2, 3)
    for bad in ["base=(0,3)", "points=[]", "slice axis=x value=1", "base=(0,3);step=(-1,0)"]:
        with pytest.raises(Exception):
            parse_line_spec(bad)


def test_construct_verify_restrict(tmp_path, capsys):
    src = write_barcode(tmp_path / "v.json", [(0, 1), (0, 1)])
    out = tmp_path / "m.json"
    code, text, _ = run(capsys, "construct", src, "--mode", "primal", "--out", out, "--no-timings")
    assert code == 0
    report = json.loads(text)
    assert report["end_dim"] == 1 and report["restriction_match"] is True
    code, text, _ = run(capsys, "verify", out, "--no-timings")
    assert code == 0 and json.loads(text)["end_dim"] == 1
    code, text, _ = run(capsys, "restrict", out, "--line", "base=(0,3);step=(1,0)")
    assert code == 0
    assert barcode_from_dict(json.loads(text)) == Barcode.intervals([(0, 1), (0, 1)])


@pytest.mark.parametrize("mode,row", [("dual", 0), ("candy", 3), ("suspension", 3)])
def test_construct_modes(tmp_path, capsys, mode, row):
    src = write_barcode(tmp_path / "v.json", [(0, 2), (1, 1)])
    out = tmp_path / "m.json"
    code, text, _ = run(capsys, "construct", src, "--mode", mode, "--out", out, "--no-timings")
    assert code == 0 and json.loads(text)["restriction_match"]
    code, text, _ = run(capsys, "restrict", out, "--line", f"slice axis=1 value={row}")
    assert barcode_from_dict(json.loads(text)) == Barcode.intervals([(0, 2), (1, 1)])


def test_construct_nd(tmp_path, capsys):
    src = write_barcode(tmp_path / "v.json", [((0, 0), (1, 1)), ((1, 0), (2, 0))], dim=2)
    code, text, _ = run(capsys, "construct", src, "--mode", "primal", "--no-timings")
    assert code == 0 and json.loads(text)["restriction_match"]
    code, _, err = run(capsys, "construct", src, "--mode", "candy")
    assert code == 2 and "suspension" in err


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "construct", bad)[0] == 2
    empty = write_barcode(tmp_path / "e.json", [])
    assert run(capsys, "construct", empty)[0] == 3
    assert run(capsys, "construct", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "construct", empty, "--field", "4")[0] == 2
    code, _, _ = run(capsys, "demo", "counterexample", "--no-timings")
    assert code == 5


def test_demo_minimal(tmp_path, capsys):
    code, text, _ = run(capsys, "demo", "minimal", "--out", tmp_path, "--no-timings")
    r = json.loads(text)
    assert code == 0
    assert (r["end_dim"], r["support_size"], r["betti"][:2]) == (1, 11, [1, 1])
    assert (tmp_path / "minimal.module.json").exists()
    code, text, _ = run(capsys, "betti", tmp_path / "minimal.module.json")
    assert json.loads(text)["betti"][:2] == [1, 1]


def test_demo_holes_and_universal(capsys):
    code, text, _ = run(capsys, "demo", "holes", "3", "--no-timings")
    assert code == 0 and json.loads(text)["betti"][:2] == [1, 3]
    code, text, _ = run(capsys, "demo", "universal", "2", "--no-timings")
    assert code == 0 and json.loads(text)["end_dim"] == 1


def test_reports_are_deterministic(tmp_path, capsys):
    src = write_barcode(tmp_path / "v.json", [(0, 3), (2, 2)])
    a = run(capsys, "construct", src, "--mode", "candy", "--no-timings", "--out", tmp_path / "a.json")[1]
    b = run(capsys, "construct", src, "--mode", "candy", "--no-timings", "--out", tmp_path / "b.json")[1]
    assert a == b
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


# golden picture; the V row (fourth from the top) has the zero at x = 0
TWO_POINT_CANDY = """\
1 1 1 . . . . . . . .
1 1 2 1 1 . . . . . .
1 1 2 2 2 1 1 . . . .
. . . . 1 . 1 . . . .
. . . . 1 1 2 2 2 1 1
. . . . . . 1 1 2 1 1
. . . . . . . . 1 1 1
"""


def test_render_single_bar_candy(tmp_path, capsys):
    m = stack(build_candy(Barcode.intervals([(0, 0)])))
    text = render_ascii(m)
    assert text.splitlines() == ["1"] * 7
    wide = stack(build_candy(Barcode.intervals([(-1, -1), (1, 1)])))
    assert render_ascii(wide) == TWO_POINT_CANDY
    svg = render_svg(wide)
    assert svg.startswith("<svg") and svg.count("<rect") == len(wide.support())
    p = tmp_path / "m.json"
    p.write_text(dumps(module_to_dict(wide)))
    code, text, _ = run(capsys, "render", p, "--format", "svg")
    assert code == 0 and text == svg


def test_fuzz_roundtrip(tmp_path, capsys):
    rng = random.Random(7)
    for i in range(15):
        pairs = []
        for _ in range(rng.randint(1, 4)):
            b = rng.randint(0, 6)
            pairs.append((b, rng.randint(b, 7)))
        src = write_barcode(tmp_path / f"v{i}.json", pairs)
        out = tmp_path / f"m{i}.json"
        code, _, _ = run(capsys, "construct", src, "--out", out)
        assert code == 0
        assert run(capsys, "verify", out)[0] == 0
        code, text, _ = run(capsys, "restrict", out, "--line", "base=(0,3);step=(1,0)")
        assert barcode_from_dict(json.loads(text)) == Barcode.intervals(pairs)


def test_batch(tmp_path, capsys):
    a = write_barcode(tmp_path / "a.json", [(0, 1)])
    b = write_barcode(tmp_path / "b.json", [(0, 0), (1, 2)])
    e = write_barcode(tmp_path / "e.json", [])
    outdir = tmp_path / "out"
    code, text, _ = run(capsys, "batch", a, b, "--out", outdir, "--jobs", "2")
    assert code == 0
    assert (outdir / "a.module.json").exists() and (outdir / "b.report.json").exists()
    code, _, _ = run(capsys, "batch", a, e, "--out", outdir)
    assert code == 3
