"""Exact bivariate polynomials over the Gaussian rationals Q(i).

Covers partial derivatives, the reciprocal polynomial, almost-self-reciprocal
detection, resultants in y (Sylvester/Bareiss and an independent
evaluate-Euclid-interpolate route), the critical-point hypothesis check and
the curve substitution y = x^n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Iterable, Mapping, Sequence

import mpmath
from mpmath import mp

from .errors import DegenerateInputError
from .numerics import DEFAULT_PREC, polyroots

__all__ = [
    "GaussRational", "UniPoly", "BiPoly", "partial", "reciprocal", "is_asr",
    "resultant_y", "resultant_y_euclid", "critical_resultant", "HypothesisReport",
    "hypothesis_check", "substitute_curve", "x_content", "primitive_part",
]


class GaussRational:
    """Exact complex rational ``re + i*im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussRational):
            re, im = re.re + 0, re.im + im
        elif isinstance(re, complex):
            re, im = Fraction(re.real), Fraction(re.imag) + Fraction(im)
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x) -> "GaussRational":
        return x if isinstance(x, GaussRational) else GaussRational(x)

    def __add__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussRational.coerce(o) - self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __mul__(self, o):
        o = GaussRational.coerce(o)
        return GaussRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussRational.coerce(o)
        n = o.re * o.re + o.im * o.im
        if not n:
            raise ZeroDivisionError("GaussRational division by zero")
        return GaussRational((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, o):
        return GaussRational.coerce(o) / self

    def __pow__(self, e: int):
        if e < 0:
            return GaussRational(1) / self ** (-e)
        out = GaussRational(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            base = base * base
        return out

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, o) -> bool:
        if isinstance(o, (int, Fraction)):
            return self.im == 0 and self.re == o
        if isinstance(o, GaussRational):
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def _mpmath_(self, prec, rounding):
        with mp.workprec(prec):
            re = mpmath.mpf(self.re.numerator) / self.re.denominator
            if not self.im:
                return mpmath.mpc(re)
            return mpmath.mpc(re, mpmath.mpf(self.im.numerator) / self.im.denominator)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i" if self.im != 1 else "i"
        sign = "+" if self.im > 0 else "-"
        im = abs(self.im)
        return f"({self.re}{sign}{'' if im == 1 else im}i)"

    __repr__ = __str__


ZERO = GaussRational(0)
ONE = GaussRational(1)


# ------------------------------------------------------------ univariate

class UniPoly:
    """Univariate polynomial, coefficients lowest degree first, no trailing zeros."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [GaussRational.coerce(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> GaussRational:
        return self.coeffs[-1]

    def __eq__(self, o) -> bool:
        return isinstance(o, UniPoly) and self.coeffs == o.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, o: "UniPoly") -> "UniPoly":
        n = max(len(self.coeffs), len(o.coeffs))
        a = self.coeffs + (ZERO,) * (n - len(self.coeffs))
        b = o.coeffs + (ZERO,) * (n - len(o.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    def __neg__(self) -> "UniPoly":
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, o: "UniPoly") -> "UniPoly":
        return self + (-o)

    def __mul__(self, o) -> "UniPoly":
        if not isinstance(o, UniPoly):
            o = GaussRational.coerce(o)
            return UniPoly(c * o for c in self.coeffs)
        if self.is_zero() or o.is_zero():
            return UniPoly()
        out = [ZERO] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    out[i + j] = out[i + j] + a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def divmod(self, o: "UniPoly") -> tuple:
        if o.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [ZERO] * max(0, len(rem) - len(o.coeffs) + 1)
        inv = ONE / o.lc
        while len(rem) >= len(o.coeffs) and rem:
            shift = len(rem) - len(o.coeffs)
            f = rem[-1] * inv
            q[shift] = f
            for i, c in enumerate(o.coeffs):
                rem[shift + i] = rem[shift + i] - f * c
            rem.pop()
            while rem and not rem[-1]:
                rem.pop()
        return UniPoly(q), UniPoly(rem)

    def exact_div(self, o: "UniPoly") -> "UniPoly":
        q, r = self.divmod(o)
        if not r.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return q

    def __call__(self, x):
        acc = ZERO if isinstance(x, (int, Fraction, GaussRational)) else 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly(c * k for k, c in enumerate(self.coeffs) if k)

    def monic(self) -> "UniPoly":
        return self * (ONE / self.lc)

    def gcd(self, o: "UniPoly") -> "UniPoly":
        a, b = self, o
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def squarefree(self) -> "UniPoly":
        if self.degree < 1:
            return self
        g = self.gcd(self.derivative())
        return self.exact_div(g) if g.degree > 0 else self

    def mp_coeffs(self, prec: int) -> list:
        with mp.workprec(prec):
            return [mpmath.mpmathify(c) for c in self.coeffs]

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return " + ".join(f"{c}*x^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c)

    __repr__ = __str__


# ------------------------------------------------------------ bivariate

@dataclass(frozen=True)
class BiPoly:
    """``sum coeffs[(i, j)] x^i y^j`` with nonzero Gaussian-rational coefficients."""

    coeffs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), c in dict(self.coeffs).items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent; normalise Laurent input first")
            c = GaussRational.coerce(c)
            if c:
                clean[(int(i), int(j))] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_terms(cls, terms: Iterable) -> "BiPoly":
        acc: dict = {}
        for i, j, c in terms:
            acc[(i, j)] = GaussRational.coerce(c) + acc.get((i, j), ZERO)
        return cls(acc)

    def __hash__(self) -> int:
        return hash(frozenset(self.coeffs.items()))

    def __eq__(self, o) -> bool:
        return isinstance(o, BiPoly) and self.coeffs == o.coeffs

    def is_zero(self) -> bool:
        return not self.coeffs

    @cached_property
    def deg_x(self) -> int:
        return max((i for i, _ in self.coeffs), default=-1)

    @cached_property
    def deg_y(self) -> int:
        return max((j for _, j in self.coeffs), default=-1)

    def __add__(self, o: "BiPoly") -> "BiPoly":
        out = dict(self.coeffs)
        for k, c in o.coeffs.items():
            out[k] = out.get(k, ZERO) + c
        return BiPoly(out)

    def __neg__(self) -> "BiPoly":
        return BiPoly({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, o: "BiPoly") -> "BiPoly":
        return self + (-o)

    def __mul__(self, o) -> "BiPoly":
        if not isinstance(o, BiPoly):
            o = GaussRational.coerce(o)
            return BiPoly({k: c * o for k, c in self.coeffs.items()})
        out: dict = {}
        for (i1, j1), a in self.coeffs.items():
            for (i2, j2), b in o.coeffs.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, ZERO) + a * b
        return BiPoly(out)

    __rmul__ = __mul__

    def y_coeffs(self) -> list:
        """``[a_0(x), ..., a_d(x)]`` with ``P = sum a_j(x) y^j``."""
        cols: list = [dict() for _ in range(self.deg_y + 1)]
        for (i, j), c in self.coeffs.items():
            cols[j][i] = c
        return [UniPoly(col.get(i, ZERO) for i in range(max(col, default=-1) + 1)) for col in cols]

    def __call__(self, x, y):
        total = 0
        for (i, j), c in self.coeffs.items():
            total = total + mpmath.mpmathify(c) * x ** i * y ** j
        return total

    def eval_mp(self, x, y):
        """Evaluate with a nested Horner scheme (in y, coefficients in x)."""
        acc = 0
        for a in reversed(self.y_coeffs()):
            ax = 0
            for c in reversed(a.coeffs):
                ax = ax * x + mpmath.mpmathify(c)
            acc = acc * y + ax
        return acc

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for (i, j), c in sorted(self.coeffs.items(), key=lambda kc: (kc[0][1], kc[0][0])):
            mono = "*".join(s for s in (
                "" if i == 0 else ("x" if i == 1 else f"x^{i}"),
                "" if j == 0 else ("y" if j == 1 else f"y^{j}"),
            ) if s)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self) -> dict:
        return {"terms": [
            {"i": i, "j": j, "re": str(c.re), "im": str(c.im)}
            for (i, j), c in sorted(self.coeffs.items())
        ]}

    @classmethod
    def from_json(cls, data: Mapping) -> "BiPoly":
        return cls.from_terms(
            (t["i"], t["j"], GaussRational(Fraction(t.get("re", "0")), Fraction(t.get("im", "0"))))
            for t in data["terms"]
        )


def partial(P: BiPoly, i: int, j: int) -> BiPoly:
    """Mixed partial derivative d^(i+j) P / dx^i dy^j."""
    out = {}
    for (a, b), c in P.coeffs.items():
        if a >= i and b >= j:
            f = 1
            for t in range(i):
                f *= a - t
            for t in range(j):
                f *= b - t
            out[(a - i, b - j)] = c * f
    return BiPoly(out)


def reciprocal(P: BiPoly) -> BiPoly:
    """``x^dx y^dy conj(P)(1/x, 1/y)``."""
    if P.is_zero():
        raise DegenerateInputError("reciprocal of the zero polynomial")
    dx, dy = P.deg_x, P.deg_y
    return BiPoly({(dx - i, dy - j): c.conjugate() for (i, j), c in P.coeffs.items()})


def is_asr(P: BiPoly) -> GaussRational | None:
    """The constant c with ``P* = c P``, or ``None`` if there is none."""
    Ps = reciprocal(P)
    if set(Ps.coeffs) != set(P.coeffs):
        return None
    key = next(iter(P.coeffs))
    c = Ps.coeffs[key] / P.coeffs[key]
    if all(Ps.coeffs[k] == c * v for k, v in P.coeffs.items()):
        return c
    return None


def x_content(P: BiPoly) -> UniPoly:
    """Monic gcd over Q(i)[x] of the coefficients a_j(x) of P in y."""
    g = UniPoly()
    for a in P.y_coeffs():
        if not a.is_zero():
            g = a if g.is_zero() else g.gcd(a)
            if g.degree == 0:
                return UniPoly([1])
    return g.monic()


def primitive_part(P: BiPoly) -> tuple:
    """Split ``P = c(x) * Q(x, y)`` with ``c`` the monic x-content.

    Returns ``(c, Q)``. Factors in x alone shift m(P(x,y)) and m(P(x,x^n))
    by the same m(c), so only Q matters for the difference.
    """
    c = x_content(P)
    if c.degree <= 0:
        return c, P
    cols = [a.exact_div(c) for a in P.y_coeffs()]
    return c, BiPoly({(i, j): v for j, a in enumerate(cols) for i, v in enumerate(a.coeffs)})


# ------------------------------------------------------------ resultants

def _bareiss_det(m: list) -> UniPoly:
    """Fraction-free determinant of a square matrix of UniPolys."""
    n = len(m)
    if n == 0:
        return UniPoly([1])
    a = [row[:] for row in m]
    sign = 1
    prev = UniPoly([1])
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return UniPoly()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def sylvester_matrix(A: Sequence, B: Sequence) -> list:
    """Sylvester matrix of two coefficient lists (lowest first), A's rows on top."""
    m, n = len(A) - 1, len(B) - 1
    size = m + n
    zero = UniPoly() if isinstance(A[0], UniPoly) else ZERO
    rows = []
    for r in range(n):
        row = [zero] * size
        for k, c in enumerate(reversed(A)):
            row[r + k] = c
        rows.append(row)
    for r in range(m):
        row = [zero] * size
        for k, c in enumerate(reversed(B)):
            row[r + k] = c
        rows.append(row)
    return rows


def _check_resultant_args(A: BiPoly, B: BiPoly):
    if A.is_zero() or B.is_zero():
        raise DegenerateInputError("resultant of a zero polynomial")
    if A.deg_y < 1 and B.deg_y < 1:
        raise DegenerateInputError("both arguments are constant in y")


def resultant_y(A: BiPoly, B: BiPoly) -> UniPoly:
    """Res_y(A, B) as the determinant of the Sylvester matrix over Q(i)[x].

    Normalised as ``lc(A)^deg(B) * prod B(roots of A)``.
    """
    _check_resultant_args(A, B)
    return _bareiss_det(sylvester_matrix(A.y_coeffs(), B.y_coeffs()))


def _euclid_resultant(a: UniPoly, b: UniPoly, m: int, n: int) -> GaussRational:
    """Resultant of univariate polys with exact degrees m, n over a field."""
    if n == 0:
        return b.lc ** m if not b.is_zero() else ZERO
    if b.is_zero():
        return ZERO
    r = a.divmod(b)[1]
    if r.is_zero():
        return ZERO if n > 0 else ONE
    k = r.degree
    sign = -1 if (m * n) % 2 else 1
    return sign * b.lc ** (m - k) * _euclid_resultant(b, r, n, k)


def resultant_y_euclid(A: BiPoly, B: BiPoly) -> UniPoly:
    """Res_y(A, B) by specialising x at integers, Euclid, and interpolation.

    An independent route to ``resultant_y``: sample points where either
    leading coefficient in y vanishes are skipped, so the formal degrees hold.
    """
    _check_resultant_args(A, B)
    ac, bc = A.y_coeffs(), B.y_coeffs()
    m, n = len(ac) - 1, len(bc) - 1
    bound = A.deg_x * n + B.deg_x * m
    xs, vals = [], []
    c = 0
    while len(xs) < bound + 1:
        pt = GaussRational(c)
        if ac[-1](pt) and bc[-1](pt):
            a = UniPoly(p(pt) for p in ac)
            b = UniPoly(p(pt) for p in bc)
            xs.append(pt)
            if m >= n:
                vals.append(_euclid_resultant(a, b, m, n))
            else:
                sign = -1 if (m * n) % 2 else 1
                vals.append(sign * _euclid_resultant(b, a, n, m))
        c = -c if c > 0 else -c + 1
    return _lagrange(xs, vals)


def _lagrange(xs: list, vals: list) -> UniPoly:
    # Newton divided differences, then expand
    n = len(xs)
    coef = list(vals)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    poly = UniPoly([coef[-1]])
    for i in range(n - 2, -1, -1):
        poly = poly * UniPoly([-xs[i], 1]) + UniPoly([coef[i]])
    return poly


def critical_resultant(P: BiPoly) -> UniPoly:
    """R(x) = Res_y(P, dP/dy); its roots are the critical points of P."""
    if P.deg_y < 1:
        raise DegenerateInputError("P must involve y")
    return resultant_y(P, partial(P, 0, 1))


@dataclass
class HypothesisReport:
    passed: bool
    code: str  # "ok", "critical point on T", "degenerate resultant"
    roots: list
    margins: list  # | |root| - 1 |
    offending: list

    def to_json(self) -> dict:
        return {
            "hypothesis": "pass" if self.passed else "fail",
            "code": self.code,
            "offending_roots": [[mpmath.nstr(r.real, 20), mpmath.nstr(r.imag, 20)] for r in self.offending],
            "min_margin": mpmath.nstr(min(self.margins), 8) if self.margins else None,
        }


def hypothesis_check(P: BiPoly, tol=None, prec: int = DEFAULT_PREC) -> HypothesisReport:
    """Check that R(x) = Res_y(P, P_y) has no roots on the unit circle.

    ``tol`` defaults to ``2^(-prec/2)``.
    """
    R = critical_resultant(P)
    if R.is_zero():
        return HypothesisReport(False, "degenerate resultant", [], [], [])
    if R.degree < 1:
        return HypothesisReport(True, "ok", [], [], [])
    with mp.workprec(prec):
        tol = mpmath.mpf(2) ** (-prec // 2) if tol is None else mpmath.mpf(tol)
        roots = list(polyroots(R.squarefree().coeffs, prec).roots)
        margins = [abs(abs(z) - 1) for z in roots]
        bad = [z for z, mgn in zip(roots, margins) if mgn < tol]
    return HypothesisReport(not bad, "ok" if not bad else "critical point on T", roots, margins, bad)


def substitute_curve(P: BiPoly, n: int) -> UniPoly:
    """Exact coefficients of P(x, x^n)."""
    if n < 1:
        raise ValueError("n must be positive")
    acc: dict = {}
    for (i, j), c in P.coeffs.items():
        k = i + n * j
        acc[k] = acc.get(k, ZERO) + c
    out = UniPoly(acc.get(k, ZERO) for k in range(max(acc, default=-1) + 1))
    if out.is_zero():
        raise DegenerateInputError(f"P(x, x^{n}) vanishes identically")
    return out
