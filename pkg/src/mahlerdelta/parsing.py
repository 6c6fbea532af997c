"""Parse polynomial expressions such as ``3*x^2*y - (1/2+2i)*y^3 + x^-1``.

Laurent input is normalised by multiplying through by ``x^a y^b`` so every
exponent is nonnegative; the multiplier is reported alongside the result.
A JSON object ``{"terms": [{"i":..,"j":..,"re":"p/q","im":"p/q"}]}`` is
accepted as well.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .bivar import BiPoly, GaussRational
from .errors import DegenerateInputError, MahlerError

__all__ = ["ParseError", "ParsedPoly", "parse_poly"]


class ParseError(MahlerError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class ParsedPoly:
    poly: BiPoly
    multiplier: tuple  # (a, b): the input was multiplied by x^a y^b

    def to_json(self) -> dict:
        return {"poly": str(self.poly), "multiplier": {"x": self.multiplier[0], "y": self.multiplier[1]}}


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([xyi])|(\*\*|[-+*/^()]))")

Laurent = dict  # (i, j) -> GaussRational, exponents may be negative


def _tokenize(text: str) -> list:
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(("num", m.group(1), start))
        elif m.group(2):
            toks.append(("sym", m.group(2), start))
        else:
            toks.append(("op", "^" if m.group(3) == "**" else m.group(3), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


def _add(a: Laurent, b: Laurent) -> Laurent:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, GaussRational(0)) + c
    return {k: c for k, c in out.items() if c}


def _mul(a: Laurent, b: Laurent) -> Laurent:
    out: dict = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, GaussRational(0)) + c1 * c2
    return {k: c for k, c in out.items() if c}


def _pow(a: Laurent, e: int, pos: int) -> Laurent:
    if e < 0:
        if len(a) != 1:
            raise ParseError("negative powers are only allowed for monomials", pos)
        (i, j), c = next(iter(a.items()))
        return {(i * e, j * e): c ** e}
    out = {(0, 0): GaussRational(1)}
    for _ in range(e):
        out = _mul(out, a)
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, val: str):
        t = self.take()
        if t[1] != val:
            raise ParseError(f"expected {val!r}", t[2])

    def parse(self) -> Laurent:
        out = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        return out

    def expr(self) -> Laurent:
        out: Laurent = {}
        sign = 1
        first = True
        while True:
            t = self.peek()
            if t[1] in "+-" and t[0] == "op":
                self.take()
                sign = -1 if t[1] == "-" else 1
            elif not first:
                return out
            term = self.term()
            if sign < 0:
                term = {k: -c for k, c in term.items()}
            out = _add(out, term)
            first, sign = False, 1
            if self.peek()[1] not in ("+", "-") or self.peek()[0] != "op":
                return out

    def term(self) -> Laurent:
        out = self.factor()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "*/":
                self.take()
                rhs = self.factor()
                if t[1] == "*":
                    out = _mul(out, rhs)
                else:
                    if len(rhs) != 1:
                        raise ParseError("division is only allowed by a monomial", t[2])
                    out = _mul(out, _pow(rhs, -1, t[2]))
            elif t[0] in ("num", "sym") or t[1] == "(":
                out = _mul(out, self.factor())  # implicit multiplication, e.g. 2x
            else:
                return out

    def factor(self) -> Laurent:
        base = self.atom()
        t = self.peek()
        if t[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] in "+-" and self.peek()[0] == "op":
                sign = -1 if self.take()[1] == "-" else 1
            e = self.take()
            if e[0] != "num" or not e[1].isdigit():
                raise ParseError("exponent must be an integer", e[2])
            return _pow(base, sign * int(e[1]), e[2])
        return base

    def atom(self) -> Laurent:
        t = self.take()
        if t[0] == "num":
            return {(0, 0): GaussRational(Fraction(t[1]))}
        if t[0] == "sym":
            return {"x": {(1, 0): GaussRational(1)},
                    "y": {(0, 1): GaussRational(1)},
                    "i": {(0, 0): GaussRational(0, 1)}}[t[1]]
        if t[1] == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if t[1] == "-":
            return {k: -c for k, c in self.factor().items()}
        raise ParseError(f"unexpected {t[1] or 'end of input'!r}", t[2])


def parse_poly(expr: str) -> ParsedPoly:
    """Parse an expression (or JSON term list) into a BiPoly with nonnegative exponents."""
    text = expr.strip()
    if text.startswith("{"):
        try:
            poly = BiPoly.from_json(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"bad JSON polynomial: {exc}", 0) from None
        if poly.is_zero():
            raise DegenerateInputError("zero polynomial")
        return ParsedPoly(poly, (0, 0))
    terms = _Parser(text).parse()
    if not terms:
        raise DegenerateInputError("zero polynomial")
    a = max(0, -min(i for i, _ in terms))
    b = max(0, -min(j for _, j in terms))
    return ParsedPoly(BiPoly({(i + a, j + b): c for (i, j), c in terms.items()}), (a, b))
