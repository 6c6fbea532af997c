"""Command-line front end.

Exit codes: 0 success, 1 usage error or table mismatch, 2 critical-point
hypothesis failure, 3 degenerate input, 4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass

import mpmath

from .bivar import hypothesis_check, is_asr, primitive_part
from .errors import HypothesisError, MahlerError
from .expansion import build_table, empirical_coefficient, fit_singular_exponent
from .mahler import delta_n, mahler_bivariate, mahler_curve
from .numerics import DEFAULT_PREC
from .parsing import parse_poly
from .rootengine import exceptional_set, track_roots
from .tables import format_number, run_tables


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int
    target_err: float | None
    jobs: int
    fmt: str

    def __post_init__(self):
        if self.precision_bits < 64:
            raise MahlerError("precision must be at least 64 bits")
        if self.target_err is not None and self.target_err <= 0:
            raise MahlerError("target error must be positive")


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 stays reserved for hypothesis failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_prec() -> int:
    env = os.environ.get("MAHLER_PREC")
    if env is None:
        return DEFAULT_PREC
    try:
        return int(env)
    except ValueError:
        raise MahlerError(f"MAHLER_PREC must be an integer, got {env!r}") from None


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None,
                        help="working precision in bits (default 256, or $MAHLER_PREC)")
    common.add_argument("--target-err", type=float, default=None,
                        help="target absolute error for quadrature (default 2^(-prec/3))")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps over n")
    expr = argparse.ArgumentParser(add_help=False)
    expr.add_argument("--expr", required=True,
                      help='polynomial, e.g. "1+x+y" or "1+x+1/x+y+1/y", or a JSON term list')

    p = _Parser(prog="mahlerdelta", description="Mahler measures along y = x^n and their expansion coefficients.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("analyze", parents=[common, expr],
                   help="critical-point hypothesis and exceptional set, with a reciprocity check (JSON)")
    s = sub.add_parser("mm", parents=[common, expr], help="Mahler measure m(P), or m(P(x,x^n)) with --curve-n (JSON)")
    s.add_argument("--curve-n", type=int, default=None, help="measure P(x, x^n) instead of P(x, y)")
    s = sub.add_parser("delta", parents=[common, expr], help="Delta_n(P) (JSON)")
    s.add_argument("--n", type=int, required=True)
    s = sub.add_parser("coeffs", parents=[common, expr], help="c_r for every residue class (CSV)")
    s.add_argument("--rmax", type=int, required=True)
    s.add_argument("--ns", type=_int_list, default=None, help="explicit n values when there is no modulus")
    s = sub.add_parser("verify", parents=[common, expr], help="n^k (Delta_n - p_{k-1}(n)) and its extrapolation (CSV)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--class", dest="n_class", type=int, required=True)
    s.add_argument("--modulus", type=int, required=True)
    s.add_argument("--ns", type=_int_list, required=True)
    s = sub.add_parser("probe", parents=[common, expr], help="fit Delta_n ~ c(n) n^s for a singular P (JSON)")
    s.add_argument("--nmax", type=int, required=True)
    s.add_argument("--nmin", type=int, default=20)
    s.add_argument("--step", type=int, default=1)
    s.add_argument("--modulus", type=int, required=True)
    s = sub.add_parser("tables", parents=[common], help="regenerate a reference table and diff against the golden copy")
    s.add_argument("--which", type=int, choices=(1, 2, 3, 4), required=True)
    s.add_argument("--out", default=None, help="also write the regenerated table to this file")
    return p


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _emit_csv(rows) -> None:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerows(rows)


@contextmanager
def _mapper(jobs: int):
    if jobs <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield pool.map


def _cmd_analyze(parsed, cfg):
    P = parsed.poly
    c = is_asr(P)
    _, Q = primitive_part(P)
    out = {"poly": str(P), "normalization": parsed.to_json()["multiplier"],
           "asr": None if c is None else str(c)}
    rep = hypothesis_check(Q, prec=cfg.precision_bits) if Q.deg_y >= 1 else None
    out["hypothesis"] = "pass" if rep is None or rep.passed else "fail"
    out["hypothesis_detail"] = rep.to_json() if rep else None
    out["exceptional"] = [e.to_json() for e in exceptional_set(P, cfg.precision_bits)]
    try:
        trajs = track_roots(P, check_hypothesis=False)
        out["toric_arcs"] = sum(1 for t in trajs for a in t.arcs if a[2] == "on-circle")
    except HypothesisError:
        out["toric_arcs"] = None
    _emit_json(out)
    return 0


def _cmd_mm(parsed, cfg, args):
    if args.curve_n is not None:
        res = mahler_curve(parsed.poly, args.curve_n, cfg.precision_bits)
    else:
        res = mahler_bivariate(parsed.poly, cfg.target_err, cfg.precision_bits, allow_critical=True)
    out = res.to_json(max(10, cfg.precision_bits // 8))
    out["normalization"] = parsed.to_json()["multiplier"]
    _emit_json(out)
    return 0


def _cmd_delta(parsed, cfg, args):
    res = delta_n(parsed.poly, args.n, cfg.precision_bits, cfg.target_err, allow_critical=True)
    _emit_json(res.to_json(max(10, cfg.precision_bits // 8)))
    return 0


def _cmd_coeffs(parsed, cfg, args):
    table = build_table(parsed.poly, args.rmax, cfg.precision_bits, ns=args.ns)
    if table.modulus:
        M = table.modulus
        cols = list(range(1, M + 1))  # classes 1..M-1 then 0, printed as n = 1..M
        rows = [["r"] + [f"c_r({n})" for n in cols]]
        for r in range(2, args.rmax + 1):
            rows.append([r] + [format_number(table.get(r, n), cfg.precision_bits) for n in cols])
    else:
        rows = [["r"] + [f"c_r({n})" for n in args.ns]]
        for r in range(2, args.rmax + 1):
            rows.append([r] + [format_number(table.get(r, n), cfg.precision_bits) for n in args.ns])
    _emit_csv(rows)
    return 0


def _cmd_verify(parsed, cfg, args):
    with _mapper(cfg.jobs) as mapper:
        res = empirical_coefficient(parsed.poly, args.k, args.n_class, args.modulus, args.ns,
                                    cfg.precision_bits, mapper=mapper)
    rows = [["n", f"n^{args.k}*(Delta_n-p_{args.k - 1}(n))", "richardson"]]
    ext = [None] + res.extrapolations
    for n, v, e in zip(res.n_list, res.sequence, ext):
        rows.append([n, format_number(v, cfg.precision_bits), "" if e is None else format_number(e, cfg.precision_bits)])
    rows.append(["limit", format_number(res.limit, cfg.precision_bits), f"order={res.order}"])
    _emit_csv(rows)
    return 0


def _cmd_probe(parsed, cfg, args):
    ns = list(range(args.nmin, args.nmax + 1, args.step))
    prec = 53 if args.prec is None else cfg.precision_bits
    with _mapper(cfg.jobs) as mapper:
        fit = fit_singular_exponent(parsed.poly, ns, args.modulus, prec=prec, mapper=mapper)
    _emit_json({
        "slope": fit.slope,
        "amplitudes": {str(k): v for k, v in fit.amplitudes.items()},
        "class_slopes": {str(k): v for k, v in fit.class_slopes.items()},
        "rms_residual": fit.rms_residual,
        "points": len(fit.data),
        "experimental": True,
    })
    return 0


def _cmd_tables(cfg, args):
    run = run_tables(args.which, cfg.precision_bits)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(run.text)
    sys.stdout.write(run.text)
    for d in run.diffs:
        sys.stderr.write(d + "\n")
    sys.stderr.write(f"table {args.which}: {'match' if run.ok else 'MISMATCH'}\n")
    return 0 if run.ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.prec if args.prec is not None else _default_prec(), args.target_err,
                        max(1, args.jobs), "json")
        with mpmath.workprec(cfg.precision_bits):
            if args.command == "tables":
                return _cmd_tables(cfg, args)
            parsed = parse_poly(args.expr)
            if args.command == "analyze":
                return _cmd_analyze(parsed, cfg)
            if args.command == "mm":
                return _cmd_mm(parsed, cfg, args)
            if args.command == "delta":
                return _cmd_delta(parsed, cfg, args)
            if args.command == "coeffs":
                return _cmd_coeffs(parsed, cfg, args)
            if args.command == "verify":
                return _cmd_verify(parsed, cfg, args)
            if args.command == "probe":
                return _cmd_probe(parsed, cfg, args)
    except MahlerError as exc:
        sys.stderr.write(f"error: {exc}\n")
        diag = getattr(exc, "diagnostics", None)
        if diag:
            sys.stderr.write(json.dumps(diag, default=str) + "\n")
        return exc.exit_code
    return 1


if __name__ == "__main__":
    sys.exit(main())
