"""Regenerate the four reference tables and diff them against vendored goldens.

Tables 1 and 2 (Phi and Psi) are compared exactly after canonicalisation;
Tables 3 and 4 are compared numerically at the tolerances below.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from importlib import resources

import mpmath
from mpmath import mp

from .bivar import BiPoly
from .exactalg import parse_intpoly, phi_poly, psi_poly, q_poly
from .expansion import coefficient, coefficient_1xy
from .mahler import delta_n
from .numerics import DEFAULT_PREC

__all__ = ["TableRun", "load_poly_golden", "load_csv_golden", "run_tables", "format_number",
           "TABLE3_TOL", "TABLE4_TOL", "ONE_X_Y"]

TABLE3_TOL = 5e-10
TABLE4_TOL = 1e-8
TABLE4_NS = (1, 61, 121, 181, 241, 301)
ONE_X_Y = BiPoly.from_terms([(0, 0, 1), (1, 0, 1), (0, 1, 1)])


@dataclass
class TableRun:
    which: int
    ok: bool
    text: str
    diffs: list = field(default_factory=list)


def _golden_text(name: str) -> str:
    return resources.files("mahlerdelta").joinpath("tables").joinpath(name).read_text(encoding="utf-8")


def _rows(text: str) -> list:
    return [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def load_poly_golden(name: str) -> dict:
    """``{index tuple: IntPoly}`` from a ``a | b | poly`` golden file."""
    out = {}
    for ln in _rows(_golden_text(name)):
        *idx, poly = [p.strip() for p in ln.split("|")]
        out[tuple(int(i) for i in idx)] = parse_intpoly(poly)
    return out


def load_csv_golden(name: str) -> list:
    rows = list(csv.reader(io.StringIO("\n".join(_rows(_golden_text(name))))))
    return [[Decimal(c) for c in row] for row in rows[1:]]


def format_number(x, prec: int = DEFAULT_PREC) -> str:
    """Fixed significant digits, max(10, prec/8), rounded half to even."""
    digits = max(10, prec // 8)
    if isinstance(x, (str, Decimal)):
        x = str(x)
        return _round_decimal(Decimal(x), digits)
    with mp.workprec(prec + 20):
        d = Decimal(mpmath.nstr(mpmath.mpmathify(x), digits + 5, strip_zeros=False, min_fixed=-mpmath.inf, max_fixed=mpmath.inf))
    return _round_decimal(d, digits)


def _round_decimal(d: Decimal, digits: int) -> str:
    if d == 0:
        return "0"
    with localcontext() as ctx:
        ctx.prec = digits + 40
        q = Decimal(1).scaleb(d.adjusted() - digits + 1)
        return format(d.quantize(q, rounding=ROUND_HALF_EVEN), "f")


def _poly_table(which: int) -> TableRun:
    name, gen, label = (("phi.txt", phi_poly, "Phi"), ("psi.txt", psi_poly, "Psi"))[which - 1]
    golden = load_poly_golden(name)
    lines, diffs = [], []
    for idx, want in sorted(golden.items()):
        got = gen(*idx)
        lines.append(f"{idx[0]} | {idx[1]} | {got}")
        if got != want:
            diffs.append(f"{label}[{idx[0]},{idx[1]}]: got {got}, golden {want}")
    if which == 1:
        for n, want in sorted(load_poly_golden("q.txt").items()):
            if q_poly(n[0]) != want:
                diffs.append(f"Q[{n[0]}]: got {q_poly(n[0])}, golden {want}")
    return TableRun(which, not diffs, "\n".join(lines) + "\n", diffs)


def _table3(prec: int) -> TableRun:
    golden = load_csv_golden("table3.csv")
    lines, diffs = ["r,c_r(1),c_r(2),c_r(3)"], []
    for row in golden:
        r = int(row[0])
        vals = [coefficient(ONE_X_Y, r, n, prec) for n in (1, 2, 3)]
        lines.append(",".join([str(r)] + [format_number(v, prec) for v in vals]))
        for n, v, want in zip((1, 2, 3), vals, row[1:]):
            err = abs(float(v) - float(want))
            if err > TABLE3_TOL:
                diffs.append(f"c_{r}({n}): got {mpmath.nstr(v, 15)}, golden {want}, |diff| {err:.3g}")
    return TableRun(3, not diffs, "\n".join(lines) + "\n", diffs)


def table4_row(n: int, prec: int = DEFAULT_PREC) -> tuple:
    """(n^2 D, n^3 (D - c2/n^2), n^4 (D - c2/n^2 - c3/n^3)) for D = Delta_n(1 + x + y)."""
    with mp.workprec(prec + 20):
        d = delta_n(ONE_X_Y, n, prec).value
        N = mpmath.mpf(n)
        c2, c3 = coefficient_1xy(2, n, prec), coefficient_1xy(3, n, prec)
        return N ** 2 * d, N ** 3 * (d - c2 / N ** 2), N ** 4 * (d - c2 / N ** 2 - c3 / N ** 3)


def _table4(prec: int) -> TableRun:
    golden = {int(row[0]): row[1:] for row in load_csv_golden("table4.csv")}
    lines, diffs = ["n,n^2*Delta_n,n^3*(Delta_n-c2/n^2),n^4*(Delta_n-c2/n^2-c3/n^3)"], []
    for n in TABLE4_NS:
        vals = table4_row(n, prec)
        lines.append(",".join([str(n)] + [format_number(v, prec) for v in vals]))
        for col, v, want in zip((2, 3, 4), vals, golden[n]):
            err = abs(float(v) - float(want))
            if err > TABLE4_TOL:
                diffs.append(f"n={n} column {col}: got {mpmath.nstr(v, 15)}, golden {want}, |diff| {err:.3g}")
    return TableRun(4, not diffs, "\n".join(lines) + "\n", diffs)


def run_tables(which: int, prec: int = DEFAULT_PREC) -> TableRun:
    """Regenerate table ``which`` (1 to 4) and diff it against its golden copy."""
    if which in (1, 2):
        return _poly_table(which)
    if which == 3:
        return _table3(prec)
    if which == 4:
        return _table4(prec)
    raise ValueError("which must be 1, 2, 3 or 4")
