"""Command-line front end: model specs in, CSV out.

Exit status: 0 success, 2 argument error, 3 every requested item was
skipped by a precondition, 4 resource limit, 5 inequality violations.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import List, Optional

from . import verify
from .approximants import Kind, make_approximant
from .charfn import bergstrom_measure, bergstrom_remainders
from .cumulants import gamma_set
from .errors import DegenerateParameterError, NumericalValidityError, PreconditionError, ResourceLimitError
from .measure import LatticeMeasure
from .models import build_model

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_SKIPPED = 3
EXIT_RESOURCE = 4
EXIT_VIOLATION = 5

MAX_BERGSTROM_ORDER = 4
ALL_KINDS = [k.value for k in Kind]


class ArgumentError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.12g}"


def _load_json(text: str):
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    elif not text.lstrip().startswith("{") and os.path.isfile(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"malformed JSON: {exc}") from exc


def _model(args):
    if not args.model:
        raise ArgumentError("--model is required")
    return build_model(_load_json(args.model))


def _kinds(args, default) -> List[Kind]:
    if not args.kinds:
        return [Kind.parse(k) for k in default]
    return [Kind.parse(k) for k in args.kinds.split(",") if k.strip()]


def _measure_rows(writer, m: LatticeMeasure, prefix=()):
    for k, w in zip(m.support, m.weights):
        writer.writerow(list(prefix) + [int(k), _fmt(w)])


# --------------------------------------------------------------------------
# commands


def cmd_dist(args, out):
    m = _model(args).exact_distribution()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["k", "probability"])
    _measure_rows(w, m)
    return EXIT_OK


def cmd_cumulants(args, out):
    cs = gamma_set(_model(args))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["quantity", "value"])
    for key, val in cs.as_dict().items():
        w.writerow([key, _fmt(val)])
    return EXIT_OK


def cmd_approx(args, out):
    cs = gamma_set(_model(args))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["kind", "k", "weight"])
    notes, built = [], 0
    for kind in _kinds(args, ["pois", "g"]):
        try:
            a = make_approximant(kind, cs, args.tol)
        except DegenerateParameterError as exc:
            notes.append(f"# warning: {kind.value} degenerate ({exc}); using pois")
            a = make_approximant(Kind.POIS, cs, args.tol)
        except PreconditionError as exc:
            notes.append(f"# skipped: {kind.value} ({exc})")
            continue
        built += 1
        params = " ".join(f"{k}={_fmt(v)}" for k, v in sorted(a.params.items()))
        notes.append(f"# {kind.value}: {params} truncation_mass={_fmt(a.truncation_mass)}")
        _measure_rows(w, a.measure, prefix=[kind.value])
    for line in notes:
        out.write(line + "\n")
    return EXIT_OK if built else EXIT_SKIPPED


def _pairs(text: str):
    out = []
    for item in text.split(","):
        n, _, p = item.partition(":")
        if not p:
            raise ArgumentError(f"grid entries must look like n:p, got {item!r}")
        out.append((int(n), float(p)))
    return out


def _ints(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ArgumentError(f"grid must be a comma separated list of integers: {exc}") from exc


def _report(report, out, args):
    out.write(report.to_csv())
    print(report.summary(), file=sys.stderr)


def cmd_sharp(args, out):
    grid = _pairs(args.grid) if args.grid else None
    try:
        report = verify.sharp_constant_run(args.experiment, grid, k1=args.k1, k2=args.k2, tol=args.tol)
    except PreconditionError as exc:
        # the grid is user input, so an out-of-range instance is an argument error
        raise ArgumentError(str(exc)) from exc
    _report(report, out, args)
    return EXIT_OK


def cmd_smoothing(args, out):
    grid = _load_json(args.grid) if args.grid else None
    report = verify.smoothing_check(args.lemma, grid)
    _report(report, out, args)
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_rates(args, out):
    if not args.grid:
        raise ArgumentError("rates needs --grid n1,n2,...")
    family = _load_json(args.model) if args.model else None
    if family is None:
        raise ArgumentError("--model is required")
    report = verify.rates_experiment(family, _ints(args.grid), _kinds(args, ["pois", "g", "g+"]), args.norm)
    _report(report, out, args)
    return EXIT_SKIPPED if report.rows and all(r.skipped for r in report.rows) else EXIT_OK


def cmd_bergstrom(args, out):
    if not 0 <= args.order <= MAX_BERGSTROM_ORDER:
        raise ArgumentError(f"--order must lie in [0, {MAX_BERGSTROM_ORDER}]")
    model = _model(args)
    grid = int(args.grid) if args.grid else None
    w = csv.writer(out, lineterminator="\n")
    if args.remainders:
        vals = bergstrom_remainders(
            model, range(args.order + 1), args.base, grid, args.depth, verify._norm_kind(args.norm)
        )
        w.writerow(["s", "base", "norm", "remainder"])
        for s, v in enumerate(vals):
            w.writerow([s, args.base, args.norm, _fmt(v)])
        return EXIT_OK
    m = bergstrom_measure(model, args.order, args.base, grid, args.depth)
    w.writerow(["k", "weight"])
    _measure_rows(w, m)
    return EXIT_OK


COMMANDS = {
    "dist": cmd_dist,
    "approx": cmd_approx,
    "cumulants": cmd_cumulants,
    "sharp": cmd_sharp,
    "smoothing": cmd_smoothing,
    "bergstrom": cmd_bergstrom,
    "rates": cmd_rates,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model spec as JSON, @file or a path to a JSON file")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--norm", choices=["tv", "local"], default="tv")
    common.add_argument("--kinds", help="comma separated approximant kinds, e.g. pois,g,nb+")
    common.add_argument("--grid", help="grid definition (command specific)")
    common.add_argument("--tol", type=float, default=1e-12, help="truncation tolerance for approximants")
    common.add_argument("--depth", type=int, default=None, help="Heinrich recursion depth")

    parser = argparse.ArgumentParser(prog="depapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("dist", parents=[common], help="exact distribution of S_n")
    sub.add_parser("approx", parents=[common], help="approximant weights and parameters")
    sub.add_parser("cumulants", parents=[common], help="factorial cumulants, remainders and condition flags")
    p = sub.add_parser("sharp", parents=[common], help="sharp-constant experiment (grid: n:p,n:p,...)")
    p.add_argument("experiment", choices=verify.SHARP_EXPERIMENTS)
    p.add_argument("--k1", type=int, default=2)
    p.add_argument("--k2", type=int, default=2)
    p = sub.add_parser("smoothing", parents=[common], help="smoothing inequalities (grid: JSON object)")
    p.add_argument("--lemma", choices=["a10", "sharpC"], default="a10")
    p = sub.add_parser("bergstrom", parents=[common], help="Bergstrom expansion term (grid: DFT size)")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--base", choices=["pois", "g"], default="pois")
    p.add_argument("--remainders", action="store_true", help="write ||F - sum_{l<=s} Brg_l|| for s <= order")
    sub.add_parser("rates", parents=[common], help="distance table and log-log slopes (grid: n1,n2,...)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    buf = io.StringIO()
    try:
        status = COMMANDS[args.command](args, buf)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (PreconditionError, NumericalValidityError) as exc:
        print(f"skipped: {exc}", file=sys.stderr)
        return EXIT_SKIPPED
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
