"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 data validation, 3 internal assertion.
SHAPELAB_THREADS overrides --threads.  Outputs are byte-identical for
identical (inputs, seed) regardless of thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from .fieldtables import FieldTableError, parse_field_table, shape_of_record
from .haar import mc_jacobian_constant, mc_theorem6_ratio
from .maximality import CongruencePredicate, local_density
from .measure import Rank2Region, equal_measure_partition
from .stats import equidist_report, report_to_json
from .tabulate import (
    EnumerationTask,
    brute_force_classes,
    enumerate_classes,
    read_forms_csv,
    write_forms_csv,
)

USAGE_EXIT = 1
DATA_EXIT = 2
INTERNAL_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


class ValidationError(ValueError):
    pass


def _parse_region(spec: str) -> Rank2Region:
    parts = spec.split(",")
    if len(parts) != 4:
        raise ValidationError(f"region needs x1,x2,y1,y2: {spec!r}")
    vals = []
    for tok in parts:
        tok = tok.strip()
        vals.append(math.inf if tok in ("inf", "Inf", "INF") else float(tok))
    return Rank2Region.box(*vals)


def _parse_cells(spec: str) -> tuple[int, int]:
    try:
        kx, ky = spec.lower().split("x")
        return int(kx), int(ky)
    except ValueError:
        raise ValidationError(f"cells must look like 4x6, got {spec!r}")


def _load_residue_file(path: str, m: int) -> CongruencePredicate:
    residues = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            parts = raw.split(",")
            if len(parts) != 4:
                raise ValidationError(f"{path}:{ln}: residue rows need 4 entries")
            residues.append(tuple(int(x) for x in parts))
    return CongruencePredicate(m, residues)


def _build_parser():
    ap = _Parser(prog="shapelab", description="cubic field tabulation and shape statistics")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("enumerate", help="tabulate canonical classes up to |disc| < xmax")
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--i", choices=["0", "1", "both"], default="both")
    p.add_argument("--maximal-only", action="store_true")
    p.add_argument("--include-c3", action="store_true")
    p.add_argument("--mod", type=int, default=None)
    p.add_argument("--residues", type=str, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("equidist", help="equidistribution report from forms.csv")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--cells", required=True, help="KXxKY, e.g. 4x6")
    p.add_argument("--region", action="append", default=[], help="x1,x2,y1,y2 (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--figures", nargs="?", const="", default=None,
                   help="also render PNG figures (optionally into DIR)")

    p = sub.add_parser("local-density", help="exact p-adic density over (Z/p^2)^4")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--what", required=True, help="maximal or file:<pred>")

    p = sub.add_parser("mc-jacobian", help="Monte Carlo Jacobian constant")
    p.add_argument("--i", choices=["0", "1"], required=True)
    p.add_argument("--testfn", choices=["A", "B"], required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("mc-ratio", help="Monte Carlo restricted volume ratio")
    p.add_argument("--i", choices=["0", "1"], required=True)
    p.add_argument("--ymax", type=float, required=True)
    p.add_argument("--region", required=True, help="x1,x2,y1,y2")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("ingest", help="ingest a degree 3-5 field table")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--d4-test", action="store_true")

    p = sub.add_parser("brute", help="independent brute-force oracle (xmax <= 10000)")
    p.add_argument("--xmax", type=int, required=True)
    p.add_argument("--out", required=True)
    return ap


def _cmd_enumerate(args) -> int:
    cong = None
    if (args.mod is None) != (args.residues is None):
        raise ValidationError("--mod and --residues must be given together")
    if args.mod is not None:
        cong = _load_residue_file(args.residues, args.mod)
    task = EnumerationTask(
        xmax=args.xmax,
        signature=args.i,
        maximal_only=args.maximal_only,
        include_c3=args.include_c3,
        congruence=cong,
    )
    rec = enumerate_classes(task, threads=args.threads)
    write_forms_csv(rec, args.out)
    print(f"wrote {len(rec)} records to {args.out}")
    return 0


def _cmd_equidist(args) -> int:
    rec = read_forms_csv(args.infile)
    kx, ky = _parse_cells(args.cells)
    spec = equal_measure_partition(kx, ky)
    regions = [(r, _parse_region(r)) for r in args.region]
    rep = equidist_report(rec, spec, regions)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_to_json(rep) + "\n")
    if args.figures is not None:
        from .plots import render_report_figures

        outdir = args.figures or (os.path.dirname(os.path.abspath(args.out)) or ".")
        stem = os.path.splitext(os.path.basename(args.out))[0]
        for pth in render_report_figures(rep, rec["x"], rec["y"], outdir, stem):
            print(f"figure: {pth}")
    print(f"wrote report to {args.out} (N={rep.N}, max rel dev {rep.max_rel_dev:.4f})")
    return 0


def _cmd_local_density(args) -> int:
    if args.what == "maximal":
        dens = local_density(args.p, "maximal")
        what = "maximal"
    elif args.what.startswith("file:"):
        path = args.what[5:]
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
            m = int(first)
        pred = _load_residue_file_skip1(path, m)
        dens = local_density(args.p, pred)
        what = args.what
    else:
        raise ValidationError("--what must be 'maximal' or 'file:<pred>'")
    out = {
        "p": args.p,
        "what": what,
        "density": f"{dens.numerator}/{dens.denominator}",
        "decimal": float(dens),
    }
    print(json.dumps(out))
    return 0


def _load_residue_file_skip1(path: str, m: int) -> CongruencePredicate:
    residues = []
    with open(path, "r", encoding="utf-8") as fh:
        fh.readline()
        for ln, raw in enumerate(fh, 2):
            raw = raw.strip()
            if not raw or raw.startswith("#"):
                continue
            parts = raw.split(",")
            if len(parts) != 4:
                raise ValidationError(f"{path}:{ln}: residue rows need 4 entries")
            residues.append(tuple(int(x) for x in parts))
    return CongruencePredicate(m, residues)


def _cmd_mc_jacobian(args) -> int:
    est = mc_jacobian_constant(int(args.i), args.testfn, args.samples, args.seed)
    out = {
        "estimate": est.value,
        "stderr": est.stderr,
        "N": est.n,
        "seed": est.seed,
        "config": {"i": int(args.i), "testfn": args.testfn},
    }
    print(json.dumps(out))
    return 0


def _cmd_mc_ratio(args) -> int:
    W = _parse_region(args.region)
    est, mu_ratio = mc_theorem6_ratio(W, int(args.i), args.ymax, args.samples, args.seed)
    out = {
        "estimate": est.value,
        "stderr": est.stderr,
        "N": est.n,
        "seed": est.seed,
        "config": {
            "i": int(args.i),
            "ymax": args.ymax,
            "region": args.region,
            "mu_ratio": mu_ratio,
        },
    }
    print(json.dumps(out))
    return 0


def _cmd_ingest(args) -> int:
    with open(args.infile, "r", encoding="utf-8") as fh:
        text = fh.read()
    records = parse_field_table(text)
    shapes = []
    for r in records:
        s = shape_of_record(r, d4_test=args.d4_test and r.degree == 4)
        entry = {
            "label": s.label,
            "degree": s.degree,
            "i": s.i,
            "disc": s.disc,
            "gram": [list(row) for row in s.gram],
            "diag_sorted": list(s.diag_sorted),
            "cosines": list(s.cosines),
            "d4_symmetric": s.d4_symmetric,
        }
        if s.degree == 3:
            entry["x"] = s.x
            entry["y"] = s.y
        shapes.append(entry)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(shapes) + "\n")
    print(f"wrote {len(shapes)} shape records to {args.out}")
    return 0


def _cmd_brute(args) -> int:
    rec = brute_force_classes(args.xmax)
    write_forms_csv(rec, args.out)
    print(f"wrote {len(rec)} records to {args.out}")
    return 0


_DISPATCH = {
    "enumerate": _cmd_enumerate,
    "equidist": _cmd_equidist,
    "local-density": _cmd_local_density,
    "mc-jacobian": _cmd_mc_jacobian,
    "mc-ratio": _cmd_mc_ratio,
    "ingest": _cmd_ingest,
    "brute": _cmd_brute,
}


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.cmd == "brute" and not (1 <= args.xmax <= 10000):
        sys.stderr.write("shapelab brute: error: --xmax must be in [1, 10000]\n")
        return USAGE_EXIT
    if args.cmd == "enumerate" and args.xmax < 1:
        sys.stderr.write("shapelab enumerate: error: --xmax must be >= 1\n")
        return USAGE_EXIT
    try:
        return _DISPATCH[args.cmd](args)
    except (ValidationError, FieldTableError, FileNotFoundError, ValueError) as e:
        sys.stderr.write(f"shapelab: data error: {e}\n")
        return DATA_EXIT
    except (AssertionError, ArithmeticError) as e:
        sys.stderr.write(f"shapelab: internal assertion: {e}\n")
        return INTERNAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
