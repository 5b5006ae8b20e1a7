"""Command-line front end: exact matrices, spectra, scans, series, fits, checks.

Couplings on the command line are exact rationals ("p/q" or "p") or the
word "symbolic"; floating-point input is rejected so results stay exact.

Exit codes: 0 success, 1 internal error, 2 invalid input or guard
violation, 3 a verification or critical-point check failed (the report
is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from fractions import Fraction

import mpmath

from . import gram as gram_mod
from . import opexpr, singlemode
from .errors import BasisTooLarge, CalofockError, ZeroPivot
from .fock import AlgebraParams, Guards
from .gram import (
    build_gram,
    critical_check,
    default_grid,
    eigen_numeric,
    gram_to_json,
    positivity_scan,
    spectrum_to_json,
)
from .opexpr import RELATIONS, FitProblem, fit_expansion, verify_relation
from .parallel import default_threads
from .scalar import NuScalar, scalar_to_json

_RATIONAL = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")
_TARGET = re.compile(r"^(K|N|P)(\d)(\d)?$")


class InputError(Exception):
    """Invalid command-line input; maps to exit code 2."""


def _parse_rational(text: str) -> Fraction:
    if not _RATIONAL.match(text):
        raise InputError(f"not an exact rational: {text!r} (use p/q; floats are rejected)")
    return Fraction(text)


def _parse_nu(text: str, allow_symbolic: bool = True) -> NuScalar:
    if text == "symbolic":
        if not allow_symbolic:
            raise InputError("this command needs a numeric coupling")
        return NuScalar.nu()
    return NuScalar.from_rat(_parse_rational(text))


def _guards(args) -> Guards:
    return Guards(args.max_modes, args.max_degree, args.max_basis)


def _params(args, allow_symbolic: bool = True) -> AlgebraParams:
    nu = _parse_nu(args.nu, allow_symbolic)
    try:
        return AlgebraParams(args.modes, nu, _guards(args))
    except ValueError as exc:
        raise InputError(str(exc))


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_json(payload: dict, out: str) -> None:
    _write(json.dumps(payload, indent=2), out)


# --- subcommands -------------------------------------------------------------


def cmd_gram(args) -> int:
    p = _params(args)
    g = build_gram(p, args.particles, args.basis, threads=args.threads)
    _emit_json(gram_to_json(g), args.out)
    return 0


def cmd_spectrum(args) -> int:
    p = _params(args, allow_symbolic=False)
    g = build_gram(p, args.particles, args.basis, threads=args.threads)
    report = eigen_numeric(g, tol=args.tol)
    payload = spectrum_to_json(report)
    payload["basis"] = args.basis
    payload["modes"] = args.modes
    payload["particles"] = args.particles
    _emit_json(payload, args.out)
    return 0


def cmd_scan(args) -> int:
    lo = _parse_rational(args.nu_min)
    hi = _parse_rational(args.nu_max)
    step = _parse_rational(args.step)
    if step <= 0 or hi < lo:
        raise InputError("need step > 0 and nu-max >= nu-min")
    grid = default_grid(lo, hi, step)
    points = positivity_scan(
        args.modes, args.particles, grid,
        tol=args.tol, basis_kind=args.basis, guards=_guards(args), threads=args.threads,
    )
    if args.format == "json":
        payload = {
            "modes": args.modes,
            "particles": args.particles,
            "basis": args.basis,
            "points": [
                {"nu": str(pt.nu), "error": pt.error}
                if pt.report is None
                else spectrum_to_json(pt.report)
                for pt in points
            ],
        }
        _emit_json(payload, args.out)
        return 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["nu", "min_eigenvalue", "rank", "multiset_dim", "positive"])
    for pt in points:
        if pt.report is None:
            writer.writerow([str(pt.nu), "nan", -1, "", "false"])
        else:
            r = pt.report
            writer.writerow(
                [str(r.nu), repr(r.min_eigenvalue), r.rank, r.multiset_dimension,
                 "true" if r.positivity else "false"]
            )
    _write(buf.getvalue(), args.out)
    return 0


def cmd_critical(args) -> int:
    checks = critical_check(args.modes, args.max_particles, _guards(args))
    payload = {
        "modes": args.modes,
        "checks": [
            {
                "particles": c.particles,
                "expected_entry": str(c.expected_entry),
                "entries_equal": c.entries_equal,
                "rank": c.rank,
                "eigenvalue": None if c.eigenvalue is None else str(c.eigenvalue),
                "passed": c.passed,
                "first_deviation": c.first_deviation,
            }
            for c in checks
        ],
        "all_passed": all(c.passed for c in checks),
    }
    _emit_json(payload, args.out)
    return 0 if payload["all_passed"] else 3


def cmd_single(args) -> int:
    nu = _parse_nu(args.nu, allow_symbolic=args.which != "c")
    alg = singlemode.SingleModeAlgebra(nu)
    ser = singlemode.series(args.which, args.terms, alg, precision=args.precision)
    if args.which == "c":
        with mpmath.workprec(max(args.precision, 128)):
            values = [mpmath.nstr(v, 40) for v in ser.values]
    else:
        values = [scalar_to_json(v) for v in ser.values]
    payload = {
        "kind": args.which,
        "terms": args.terms,
        "nu": args.nu,
        "values": values,
    }
    _emit_json(payload, args.out)
    return 0


def _parse_target(text: str) -> FitProblem:
    m = _TARGET.match(text)
    if text in ("N", "total", "total_number"):
        return FitProblem("total_number", 0)
    if not m:
        raise InputError(
            f"unknown target {text!r}; use K<i><j>, N<i><j>, N<i>, N, or P<i><j>"
        )
    kind, i, j = m.group(1), int(m.group(2)), m.group(3)
    if kind == "K":
        if j is None:
            raise InputError("exchange target needs two mode digits, e.g. K12")
        return FitProblem("exchange", 0, i, int(j))
    if kind == "P":
        if j is None:
            raise InputError("pair target needs two mode digits, e.g. P12")
        return FitProblem("pair", 0, i, int(j))
    return FitProblem("transition", 0, i, int(j) if j is not None else i)


def cmd_fit(args) -> int:
    p = _params(args)
    base = _parse_target(args.target)
    problem = FitProblem(base.target, args.degree, base.i, base.j)
    if base.target == "exchange" and base.i == base.j:
        raise InputError("exchange target modes must differ")
    for mode in (base.i, base.j):
        if mode and mode > args.modes:
            raise InputError(f"target mode {mode} exceeds --modes {args.modes}")
    result = fit_expansion(problem, p)
    payload = {
        "target": problem.describe(),
        "degree": args.degree,
        "nu": args.nu,
        "exact_action": result.exact_action,
        "pivot_roots": [str(r) for r in result.pivot_roots],
        "expression": opexpr.expr_to_json(result.expression),
    }
    _emit_json(payload, args.out)
    return 0


def cmd_verify(args) -> int:
    p = _params(args)
    if args.relations == "all":
        ids = sorted(RELATIONS)
    else:
        ids = [r.strip() for r in args.relations.split(",") if r.strip()]
    reports = [verify_relation(rel, p, args.degree) for rel in ids]
    payload = {
        "modes": args.modes,
        "degree": args.degree,
        "nu": args.nu,
        "relations": [
            {
                "id": r.relation,
                "passed": r.passed,
                "states_checked": r.states_checked,
                "counterexample": r.counterexample,
                "notes": list(r.notes),
            }
            for r in reports
        ],
        "all_passed": all(r.passed for r in reports),
    }
    _emit_json(payload, args.out)
    return 0 if payload["all_passed"] else 3


# --- parser ------------------------------------------------------------------


def _add_common(sub, nu: bool = True) -> None:
    sub.add_argument("--out", default="-", help="output path (default stdout)")
    sub.add_argument("--threads", type=int, default=default_threads(),
                     help="worker cap for parallel sections")
    sub.add_argument("--max-modes", type=int, default=6, help="mode-count guard")
    sub.add_argument("--max-degree", type=int, default=6, help="degree guard")
    sub.add_argument("--max-basis", type=int, default=200_000, help="basis-size guard")
    if nu:
        sub.add_argument("--nu", required=True, help='coupling: "p/q" or "symbolic"')


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="calofock",
        description="Exact Fock-space toolkit for the deformed M-mode oscillator algebra",
    )
    sp = ap.add_subparsers(dest="command", required=True)

    g = sp.add_parser("gram", help="build a Gram matrix (symbolic or at a rational coupling)")
    g.add_argument("--modes", type=int, required=True)
    g.add_argument("--particles", type=int, required=True)
    g.add_argument("--basis", choices=("sequence", "multiset"), default="sequence")
    _add_common(g)
    g.set_defaults(func=cmd_gram)

    s = sp.add_parser("spectrum", help="numeric eigenvalues plus exact rank")
    s.add_argument("--modes", type=int, required=True)
    s.add_argument("--particles", type=int, required=True)
    s.add_argument("--basis", choices=("sequence", "multiset"), default="sequence")
    s.add_argument("--tol", type=float, default=gram_mod.JACOBI_TOL)
    _add_common(s)
    s.set_defaults(func=cmd_spectrum)

    sc = sp.add_parser("scan", help="positivity scan over a rational coupling grid")
    sc.add_argument("--modes", type=int, required=True)
    sc.add_argument("--particles", type=int, required=True)
    sc.add_argument("--nu-min", default="-3/5")
    sc.add_argument("--nu-max", default="1")
    sc.add_argument("--step", default="1/64")
    sc.add_argument("--basis", choices=("sequence", "multiset"), default="sequence")
    sc.add_argument("--format", choices=("csv", "json"), default="csv")
    sc.add_argument("--tol", type=float, default=gram_mod.JACOBI_TOL)
    _add_common(sc, nu=False)
    sc.set_defaults(func=cmd_scan)

    c = sp.add_parser("critical", help="entry/rank/eigenvalue checks at nu = -1/M")
    c.add_argument("--modes", type=int, required=True)
    c.add_argument("--max-particles", type=int, required=True)
    _add_common(c, nu=False)
    c.set_defaults(func=cmd_critical)

    si = sp.add_parser("single", help="single-mode expansion series")
    si.add_argument("--which", choices=singlemode.SERIES_KINDS, required=True)
    si.add_argument("--terms", type=int, required=True)
    si.add_argument("--precision", type=int, default=128, help="bits for the c series")
    _add_common(si)
    si.set_defaults(func=cmd_single)

    f = sp.add_parser("fit", help="fit a normally ordered expansion of a named operator")
    f.add_argument("--modes", type=int, required=True)
    f.add_argument("--target", required=True,
                   help="K<i><j> exchange, N<i><j> transition, N<i> partial number, "
                        "N total number, P<i><j> pair a_i adag_j")
    f.add_argument("--degree", type=int, required=True)
    _add_common(f)
    f.set_defaults(func=cmd_fit)

    v = sp.add_parser("verify", help="check algebra relations on low-degree monomials")
    v.add_argument("--modes", type=int, required=True)
    v.add_argument("--degree", type=int, required=True)
    v.add_argument("--relations", default="all",
                   help="comma list or 'all'; ids: " + ", ".join(sorted(RELATIONS)))
    _add_common(v)
    v.set_defaults(func=cmd_verify)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, BasisTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ZeroPivot as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CalofockError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
