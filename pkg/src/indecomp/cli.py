"""Command-line front end.

Exit codes: 0 indecomposable (or plain success), 1 runtime failure, 2 parse
or usage error, 3 empty barcode, 4 verdict unknown, 5 decomposable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field as dc_field
from multiprocessing import Pool

from . import construction as C
from .field_linalg import FieldSpec
from .formats import (FormatError, barcode_from_dict, barcode_to_dict, dumps, loads,
                      module_from_dict, module_to_dict, write_text)
from .grid_module import (Affine, AxisEmbed, Explicit, GridModule, hyperplane_restrict, rectangle_barcode,
                          restrict, stack)
from .homology import betti_numbers, clique_cubical
from .render import render_ascii, render_svg
from .verify import Decomposable, Indecomposable, indecomposability

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_EMPTY = 3
EXIT_UNKNOWN = 4
EXIT_DECOMPOSABLE = 5

# row of V inside each stacked construction
V_ROW = {"primal": 3, "dual": 0, "candy": 3, "suspension": 3}


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    input_digest: str
    mode: str
    end_dim: int | None = None
    verdict: str | None = None
    restriction_match: bool | None = None
    betti: list | None = None
    support_size: int | None = None
    timings: dict = dc_field(default_factory=dict)

    def to_json(self, timings: bool = True) -> str:
        d = asdict(self)
        if not timings:
            d.pop("timings")
        return json.dumps(d, sort_keys=True, indent=2) + "\n"


def _digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def verdict_code(v) -> int:
    if isinstance(v, Indecomposable):
        return EXIT_OK
    if isinstance(v, Decomposable):
        return EXIT_DECOMPOSABLE
    return EXIT_UNKNOWN


def _analyze(m: GridModule, report: RunReport, seed: int, with_betti: bool = True):
    t0 = time.perf_counter()
    v = indecomposability(m, seed=seed)
    report.timings["verify"] = round(time.perf_counter() - t0, 6)
    report.end_dim = v.end_dim
    report.verdict = v.name
    report.support_size = len(m.fibers)
    if with_betti:
        t0 = time.perf_counter()
        report.betti = list(betti_numbers(clique_cubical(m.support())))
        report.timings["betti"] = round(time.perf_counter() - t0, 6)
    return v


def _field(args) -> FieldSpec:
    try:
        return FieldSpec(args.field)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _emit(text: str, out: str | None):
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def build_module(bc, mode: str, field: FieldSpec) -> GridModule:
    if mode == "primal":
        s = C.build_primal(bc, field)
    elif mode == "dual":
        s = C.build_dual(bc, field)
    elif mode == "candy":
        if bc.dim != 1:
            raise UsageError("candy mode needs a 1D barcode; use suspension for nD")
        s = C.build_candy(bc, field)
    elif mode == "suspension":
        s = C.suspension(bc, field)
    else:
        raise UsageError(f"unknown mode {mode!r}")
    return stack(s, field=field)


def construct_one(data: bytes, mode: str, field: FieldSpec, seed: int):
    """Returns ``(report, module)`` for raw barcode bytes."""
    bc = barcode_from_dict(loads(data.decode("utf-8", errors="replace")))
    report = RunReport(_digest(data), mode)
    if len(bc) == 0:
        return report, None
    t0 = time.perf_counter()
    m = build_module(bc, mode, field)
    report.timings["construct"] = round(time.perf_counter() - t0, 6)
    _analyze(m, report, seed)
    row = hyperplane_restrict(m, AxisEmbed(m.dim - 1, V_ROW[mode]))
    report.restriction_match = rectangle_barcode(row) == bc
    return report, m


def cmd_construct(args) -> int:
    data = _read(args.input)
    report, m = construct_one(data, args.mode, _field(args), args.seed)
    if m is None:
        print("error: empty barcode", file=sys.stderr)
        return EXIT_EMPTY
    if args.out:
        write_text(args.out, dumps(module_to_dict(m)))
    sys.stdout.write(report.to_json(timings=not args.no_timings))
    return EXIT_OK if report.verdict == "indecomposable" else (
        EXIT_DECOMPOSABLE if report.verdict == "decomposable" else EXIT_UNKNOWN)


def _load_module(path, args=None) -> tuple[bytes, GridModule]:
    data = _read(path)
    return data, module_from_dict(loads(data.decode("utf-8", errors="replace")))


def cmd_verify(args) -> int:
    data, m = _load_module(args.module)
    report = RunReport(_digest(data), "verify")
    v = _analyze(m, report, args.seed, with_betti=False)
    sys.stdout.write(report.to_json(timings=not args.no_timings))
    return verdict_code(v)


_VEC = r"\(\s*-?\d+(?:\s*,\s*-?\d+)*\s*\)"


def _parse_vec(s: str):
    s = s.strip()
    if not re.fullmatch(_VEC, s):
        raise UsageError(f"bad vector {s!r}")
    return tuple(int(v) for v in s[1:-1].split(","))


def parse_line_spec(spec: str):
    """``base=(x,y);step=(dx,dy)``, ``points=[(..),..]`` or ``slice axis=k value=v``."""
    spec = spec.strip()
    m = re.fullmatch(r"base\s*=\s*(" + _VEC + r")\s*;\s*step\s*=\s*(" + _VEC + r")", spec)
    if m:
        try:
            return Affine(_parse_vec(m.group(1)), _parse_vec(m.group(2)))
        except ValueError as e:
            raise UsageError(str(e)) from None
    m = re.fullmatch(r"points\s*=\s*\[(.*)\]", spec)
    if m:
        pts = re.findall(_VEC, m.group(1))
        rest = re.sub(_VEC, "", m.group(1)).replace(",", "").strip()
        if not pts or rest:
            raise UsageError(f"bad point list in {spec!r}")
        try:
            return Explicit(tuple(_parse_vec(p) for p in pts))
        except ValueError as e:
            raise UsageError(str(e)) from None
    m = re.fullmatch(r"slice\s+axis\s*=\s*(\d+)\s+value\s*=\s*(-?\d+)", spec)
    if m:
        return AxisEmbed(int(m.group(1)), int(m.group(2)))
    raise UsageError(f"unrecognized line spec {spec!r}")


def cmd_restrict(args) -> int:
    _, m = _load_module(args.module)
    line = parse_line_spec(args.line)
    try:
        if isinstance(line, AxisEmbed):
            r = hyperplane_restrict(m, line)
        else:
            r = restrict(m, line)
    except ValueError as e:
        raise UsageError(str(e)) from None
    try:
        bc = rectangle_barcode(r)
    except ValueError as e:
        print(f"error: restriction is not rectangle-decomposable: {e}", file=sys.stderr)
        return EXIT_FAIL
    _emit(dumps(barcode_to_dict(bc)), args.out)
    return EXIT_OK


def cmd_betti(args) -> int:
    _, m = _load_module(args.module)
    top = m.dim if args.max_dim is None else args.max_dim
    b = betti_numbers(clique_cubical(m.support()), _field(args), top)
    _emit(json.dumps({"betti": list(b)}) + "\n", args.out)
    return EXIT_OK


def demo_module(name: str, arg: int | None, field: FieldSpec) -> GridModule:
    if name == "holes":
        return C.build_n_holes(1 if arg is None else arg, field)
    if name == "minimal":
        return C.minimal_hole_module(field)
    if name == "universal":
        return C.universal_prefix(3 if arg is None else arg, field)
    if name == "counterexample":
        return stack(C.counterexample_stack(field), field=field)
    raise UsageError(f"unknown demo {name!r}")


def cmd_demo(args) -> int:
    field = _field(args)
    m = demo_module(args.name, args.arg, field)
    text = dumps(module_to_dict(m))
    report = RunReport(_digest(text.encode()), f"demo:{args.name}")
    v = _analyze(m, report, args.seed)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        stem = args.name if args.arg is None else f"{args.name}-{args.arg}"
        write_text(os.path.join(args.out, f"{stem}.module.json"), text)
        write_text(os.path.join(args.out, f"{stem}.report.json"), report.to_json(timings=False))
    sys.stdout.write(report.to_json(timings=not args.no_timings))
    return verdict_code(v)


def cmd_render(args) -> int:
    _, m = _load_module(args.module)
    try:
        text = render_ascii(m) if args.format == "ascii" else render_svg(m)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(text, args.out)
    return EXIT_OK


def _batch_job(job):
    path, mode, char, seed, outdir = job
    try:
        with open(path, "rb") as fh:
            data = fh.read()
        report, m = construct_one(data, mode, FieldSpec(char), seed)
    except (FormatError, UsageError, OSError) as e:
        return path, EXIT_PARSE, str(e)
    if m is None:
        return path, EXIT_EMPTY, "empty barcode"
    stem = os.path.splitext(os.path.basename(path))[0]
    write_text(os.path.join(outdir, f"{stem}.module.json"), dumps(module_to_dict(m)))
    write_text(os.path.join(outdir, f"{stem}.report.json"), report.to_json(timings=False))
    code = EXIT_OK if report.verdict == "indecomposable" else (
        EXIT_DECOMPOSABLE if report.verdict == "decomposable" else EXIT_UNKNOWN)
    return path, code, report.verdict


def cmd_batch(args) -> int:
    _field(args)
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    jobs = [(p, args.mode, args.field, args.seed, outdir) for p in args.inputs]
    if args.jobs > 1 and len(jobs) > 1:
        with Pool(args.jobs) as pool:
            results = pool.map(_batch_job, jobs)
    else:
        results = [_batch_job(j) for j in jobs]
    worst = EXIT_OK
    for path, code, msg in results:
        print(f"{path}\t{code}\t{msg}")
        worst = max(worst, code)
    return worst


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", type=int, default=2, help="characteristic: a prime, or 0 for rationals")
    common.add_argument("--seed", type=int, default=0, help="seed for the randomized idempotent search")
    common.add_argument("--out", default=None, help="output path (directory for demo/batch)")
    common.add_argument("--no-timings", action="store_true", help="omit timings from reports")

    p = argparse.ArgumentParser(prog="indecomp",
                                description="Build and check indecomposable grid modules with prescribed restrictions.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("construct", parents=[common], help="build a module from a barcode file")
    s.add_argument("input")
    s.add_argument("--mode", choices=["primal", "dual", "candy", "suspension"], default="primal")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("verify", parents=[common], help="endomorphism dimension and verdict")
    s.add_argument("module")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("restrict", parents=[common], help="barcode of a line or hyperplane restriction")
    s.add_argument("module")
    s.add_argument("--line", required=True,
                   help="'base=(x,y);step=(dx,dy)', 'points=[(x,y),...]' or 'slice axis=k value=v'")
    s.set_defaults(func=cmd_restrict)

    s = sub.add_parser("betti", parents=[common], help="Betti numbers of the support")
    s.add_argument("module")
    s.add_argument("--max-dim", type=int, default=None)
    s.set_defaults(func=cmd_betti, field=0)

    s = sub.add_parser("demo", parents=[common], help="holes N | minimal | universal K | counterexample")
    s.add_argument("name", choices=["holes", "minimal", "universal", "counterexample"])
    s.add_argument("arg", nargs="?", type=int, default=None)
    s.set_defaults(func=cmd_demo)

    s = sub.add_parser("render", parents=[common], help="draw the support with fiber dimensions")
    s.add_argument("module")
    s.add_argument("--format", choices=["ascii", "svg"], default="ascii")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("batch", parents=[common], help="construct many barcode files")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--mode", choices=["primal", "dual", "candy", "suspension"], default="primal")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (FormatError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
