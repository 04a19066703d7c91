"""Command-line interface.  Exit codes: 0 all pass, 1 verification failures, 2 bad input."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import catalog
from .curvature import curvature_data
from .delta import (DeltaOptions, admissible_partitions, chen_coefficients, delta_estimate,
                    chen_rhs, validate_partition)
from .errors import ConfigError, DeltaforgeError, IoError
from .extrinsic import extrinsic_data
from .immersion import parse_spec
from .jets import jet2_hyperdual
from .report import Job, Tolerances, emit_csv, emit_report, run_job

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _parse_params(items):
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--param {name} needs a number, got {value!r}") from None
    return out


def _read_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read spec {path}: {exc}") from None


def _source_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", help="catalog family id (see `catalog list`)")
    src.add_argument("--spec", help="path to a spec document")
    p.add_argument("--n", type=int, help="intrinsic dimension (catalog families)")
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("--pad-to", type=int, default=None, help="embed into a larger space form")
    p.add_argument("--partition", action="append", default=[],
                   help="comma-separated parts; repeatable (default: every (n1, n-n1))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=32, help="random optimizer starts")


def _verify_args(p):
    _source_args(p)
    p.add_argument("--points", default="grid:3", help="grid:K | random:C | file:PATH")
    p.add_argument("--tol", type=float, default=1e-6, help="gap tolerance")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="-", help="report path ('-' for stdout)")
    p.add_argument("--emit-csv", default=None, metavar="FILE")
    p.add_argument("--fd-check", action="store_true", help="cross-check jets by finite differences")


def build_parser():
    ap = argparse.ArgumentParser(prog="deltaforge",
                                 description="Check delta-invariant ideality of immersions.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="inequality constants c(...) and b(...)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--partition", required=True)

    p = sub.add_parser("catalog", help="built-in families")
    csub = p.add_subparsers(dest="catalog_command", required=True)
    csub.add_parser("list")
    show = csub.add_parser("show")
    show.add_argument("family")
    show.add_argument("--n", type=int, default=None)

    _verify_args(sub.add_parser("verify", help="verify points and write a JSON report"))

    p = sub.add_parser("delta", help="delta estimate at one point")
    _source_args(p)
    p.add_argument("--point", required=True, help="x1,...,xn")

    p = sub.add_parser("sweep", help="verify over a parameter grid")
    _verify_args(p)
    p.add_argument("--grid", required=True, help="a=lo:hi:count[,b=...]")
    return ap


def _cmd_coeffs(args, out):
    part = validate_partition(args.n, args.partition)
    c, b = chen_coefficients(part)
    print(f"n={part.n} partition=({part.label()})", file=out)
    print(f"c = {c!r}", file=out)
    print(f"b = {b!r}", file=out)
    return EXIT_OK


def _cmd_catalog(args, out):
    if args.catalog_command == "list":
        for fam in catalog.FAMILIES.values():
            print(f"{fam.id:10s} {fam.kind:10s} n>={fam.min_n}  {fam.constraint:12s} "
                  f"{fam.description}", file=out)
        return EXIT_OK
    fam = catalog.get_family(args.family)
    n = args.n or max(fam.min_n, 4)
    spec = catalog.build_catalog(fam.id, n)
    print(f"family      {fam.id}", file=out)
    print(f"ambient     {spec.sf.label()}", file=out)
    print(f"min n       {fam.min_n}", file=out)
    print(f"parameters  {', '.join(fam.params)} (defaults {fam.defaults})", file=out)
    print(f"constraint  {fam.constraint}", file=out)
    print(f"about       {fam.description}", file=out)
    print(f"domain n={n}", file=out)
    for i, (lo, hi) in enumerate(spec.domain, start=1):
        print(f"  x{i} in [{lo:.6g}, {hi:.6g}]", file=out)
    print("map", file=out)
    for i, text in enumerate(spec.coords, start=1):
        print(f"  u{i} = {text}", file=out)
    return EXIT_OK


def default_partitions(n):
    """(n-1) and every two-block split (n1, n-n1) of the whole tangent space."""
    return [p.parts for p in admissible_partitions(n)
            if p.parts == (n - 1,) or (p.k == 2 and p.total == n)]


def _job(args, grid=None):
    spec_text = _read_spec(args.spec) if args.spec else None
    if args.family:
        if args.n is None:
            raise ConfigError("--n is required with --family")
        n = args.n
    else:
        n = parse_spec(spec_text).n
    parts = args.partition or default_partitions(n)
    return Job(family=args.family, spec_text=spec_text, n=n, params=_parse_params(args.param),
               param_grid=grid, pad_to=args.pad_to, partitions=parts, points=args.points,
               tolerances=Tolerances(gap=args.tol), seed=args.seed, starts=args.starts,
               threads=args.threads, fd_check=args.fd_check)


def _print_summary(report, out):
    s = report["summary"]
    fmt = lambda v: "n/a" if v is None else f"{v:.3e}"  # noqa: E731
    print(f"points={s['points']} failures={s['failures']} errors={s['errors']} "
          f"max_gap={fmt(s['max_gap'])} max_residual={fmt(s['max_residual'])} "
          f"all_pass={s['all_pass']}", file=out)


def _cmd_verify(args, out, grid=None):
    report = run_job(_job(args, grid))
    emit_report(report, args.out)
    if args.emit_csv:
        emit_csv(report, args.emit_csv)
    _print_summary(report, sys.stderr if args.out in (None, "-") else out)
    return EXIT_OK if report["summary"]["all_pass"] else EXIT_FAIL


def _cmd_delta(args, out):
    if args.family:
        if args.n is None:
            raise ConfigError("--n is required with --family")
        params = dict(catalog.get_family(args.family).defaults)
        params.update(_parse_params(args.param))
        spec = catalog.build_catalog(args.family, args.n, params, pad_to=args.pad_to)
    else:
        spec = parse_spec(_read_spec(args.spec))
    try:
        x = np.array([float(v) for v in args.point.split(",")])
    except ValueError:
        raise ConfigError(f"--point must be comma-separated numbers, got {args.point!r}") from None
    x = spec.check_point(x)
    curv = curvature_data(extrinsic_data(spec.sf, jet2_hyperdual(spec, x)))
    parts = args.partition or [p.parts for p in admissible_partitions(spec.n)]
    status = EXIT_OK
    for part in parts:
        part = validate_partition(spec.n, part)
        rep = delta_estimate(curv, part, DeltaOptions(starts=args.starts, seed=args.seed), point=x)
        rhs = chen_rhs(part, curv.ext.H_sq, curv.c)
        gap = rhs - rep.delta_lower
        ideal = abs(gap) <= 1e-6
        print(f"partition=({part.label()}) tau={rep.tau:.15g} best_sum={rep.best_sum:.15g} "
              f"delta_lower={rep.delta_lower:.15g} rhs={rhs:.15g} gap={gap:.3e} "
              f"ideal={ideal} starts={rep.starts} converged={rep.converged}", file=out)
        if gap < -1e-6:
            status = EXIT_FAIL
    return status


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "coeffs":
            return _cmd_coeffs(args, out)
        if args.command == "catalog":
            return _cmd_catalog(args, out)
        if args.command == "verify":
            return _cmd_verify(args, out)
        if args.command == "sweep":
            return _cmd_verify(args, out, grid=args.grid)
        if args.command == "delta":
            return _cmd_delta(args, out)
    except DeltaforgeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    parser.error(f"unknown command {args.command}")
    return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
