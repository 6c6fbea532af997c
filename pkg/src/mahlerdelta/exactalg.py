"""Exact integer combinatorics and sparse integer polynomials.

Houses the Stirling numbers, partial Bell polynomials ``B[n,k]``, the
``Phi[n,k]`` polynomials (the ``(z d/dz)^k f^m`` expansion), the implicit
derivative polynomials ``Q[n]`` and the coefficient polynomials ``Psi[r,a]``.

Polynomials live over indexed indeterminates ``y[i]`` and ``w[i,j]``. All
values are immutable; caches are plain ``functools`` caches keyed on ints.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Iterator, Mapping, NamedTuple

import mpmath

__all__ = [
    "IndexedVar", "IntPoly", "y", "w",
    "stirling_first", "stirling_second", "bell_partial", "phi_poly",
    "q_poly", "q_terms", "q_eval", "psi_poly", "psi_eval", "eval_intpoly",
    "parse_intpoly",
]


class IndexedVar(NamedTuple):
    """An indeterminate ``y[i]`` (family ``"y"``) or ``w[i,j]`` (family ``"w"``)."""

    family: str
    index: tuple

    def __str__(self) -> str:
        return f"{self.family}[{','.join(map(str, self.index))}]"


def y(i: int) -> IndexedVar:
    if i < 0:
        raise ValueError("negative index")
    return IndexedVar("y", (i,))


def w(i: int, j: int) -> IndexedVar:
    if i < 0 or j < 0:
        raise ValueError("negative index")
    return IndexedVar("w", (i, j))


# A monomial is a tuple of (IndexedVar, exponent) pairs sorted by variable.
Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _mono_key(m: Monomial):
    # graded lex: higher total degree first, then larger exponent on the
    # earliest variable first
    return (-sum(e for _, e in m), [(v, -e) for v, e in m])


class IntPoly:
    """Sparse polynomial with Python-int coefficients.

    ``terms`` maps monomials to nonzero ints. Zero coefficients are never
    stored, so two equal polynomials have equal ``terms`` dicts and identical
    ``str()`` output.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, int] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = int(c)
        self.terms = clean
        self._hash = None

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls({(): c})

    @classmethod
    def var(cls, v: IndexedVar, e: int = 1) -> "IntPoly":
        return cls({((v, e),): 1})

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=-1)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = IntPoly.const(other)
        return isinstance(other, IntPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other) -> "IntPoly":
        if isinstance(other, int):
            other = IntPoly.const(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return IntPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "IntPoly":
        return IntPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "IntPoly":
        if isinstance(other, int):
            other = IntPoly.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "IntPoly":
        return (-self) + other

    def __mul__(self, other) -> "IntPoly":
        if isinstance(other, int):
            return IntPoly({m: c * other for m, c in self.terms.items()})
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "IntPoly":
        if e < 0:
            raise ValueError("negative power")
        result = IntPoly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: _mono_key(mc[0]))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, (m, c) in enumerate(self.sorted_terms()):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            factors = [f"{v}^{e}" if e != 1 else str(v) for v, e in m]
            if not factors:
                body = str(a)
            elif a == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(a)] + factors)
            if k == 0:
                parts.append(body if sign == "+" else "-" + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"IntPoly({self})"

    def substitute(self, values: Mapping[IndexedVar, "IntPoly"]) -> "IntPoly":
        """Compose: replace each variable found in ``values``."""
        out = IntPoly()
        powcache: dict = {}
        for m, c in self.terms.items():
            term = IntPoly.const(c)
            rest = []
            for v, e in m:
                if v in values:
                    key = (v, e)
                    if key not in powcache:
                        powcache[key] = values[v] ** e
                    term = term * powcache[key]
                else:
                    rest.append((v, e))
            if rest:
                term = term * IntPoly({tuple(rest): 1})
            out = out + term
        return out


# ---------------------------------------------------------------- Stirling

@lru_cache(maxsize=None)
def stirling_first(n: int, k: int) -> int:
    """Unsigned Stirling number of the first kind, c(n, k)."""
    if n < 0 or k < 0:
        raise ValueError("negative argument")
    if n == 0 and k == 0:
        return 1
    if n == 0 or k == 0 or k > n:
        return 0
    # iterate rows to keep recursion depth flat for large n
    row = [1]
    for m in range(1, n + 1):
        new = [0] * (m + 1)
        for j in range(1, m + 1):
            new[j] = (row[j - 1] if j - 1 < len(row) else 0) + (m - 1) * (row[j] if j < len(row) else 0)
        row = new
    return row[k]


@lru_cache(maxsize=None)
def _stirling2_row(n: int) -> tuple:
    if n == 0:
        return (1,)
    prev = _stirling2_row(n - 1)
    row = [0] * (n + 1)
    for j in range(1, n + 1):
        row[j] = (prev[j - 1] if j - 1 < len(prev) else 0) + j * (prev[j] if j < len(prev) else 0)
    return tuple(row)


def stirling_second(n: int, k: int) -> int:
    """Stirling number of the second kind, S(n, k)."""
    if n < 0 or k < 0:
        raise ValueError("negative argument")
    if k > n:
        return 0
    for m in range(0, n, 64):  # warm the cache without deep recursion
        _stirling2_row(m)
    return _stirling2_row(n)[k]


# ---------------------------------------------------------------- Bell

def _partitions_k(n: int, k: int, maxpart: int | None = None) -> Iterator[list]:
    """Partitions of n into exactly k positive parts, as nonincreasing lists."""
    if maxpart is None:
        maxpart = n
    if k == 0:
        if n == 0:
            yield []
        return
    if n < k:
        return
    for p in range(min(maxpart, n - k + 1), 0, -1):
        if p * k < n:
            break
        for rest in _partitions_k(n - p, k - 1, p):
            yield [p] + rest


@lru_cache(maxsize=None)
def bell_partial(n: int, k: int) -> IntPoly:
    """Exponential partial Bell polynomial ``B[n,k](y[1], ..., y[n-k+1])``."""
    if n < 0 or k < 0:
        raise ValueError("negative argument")
    terms = {}
    nf = factorial(n)
    for parts in _partitions_k(n, k):
        mult: dict = {}
        for p in parts:
            mult[p] = mult.get(p, 0) + 1
        denom = 1
        for i, j in mult.items():
            denom *= factorial(j) * factorial(i) ** j
        mono = tuple(sorted((y(i), j) for i, j in mult.items()))
        terms[mono] = nf // denom
    return IntPoly(terms)


# ---------------------------------------------------------------- Phi

@lru_cache(maxsize=None)
def phi_poly(n: int, k: int) -> IntPoly:
    """``Phi[n,k](y[0], ..., y[n-k+1])``.

    Sum over ``k <= i <= j <= n`` of
    ``(-1)^(i-k) c(i,k) S(n,j) y0^(n-i) B[j,i](y1, ...)``.
    """
    if n < 0 or k < 0 or k > n:
        return IntPoly()
    out: dict = {}
    for i in range(k, n + 1):
        ci = stirling_first(i, k)
        if not ci:
            continue
        sgn = -1 if (i - k) % 2 else 1
        y0 = ((y(0), n - i),) if n - i else ()
        for j in range(i, n + 1):
            s = stirling_second(n, j)
            if not s:
                continue
            for m, c in bell_partial(j, i).terms.items():
                mm = _mono_mul(y0, m)
                out[mm] = out.get(mm, 0) + sgn * ci * s * c
    return IntPoly(out)


# ---------------------------------------------------------------- Q_n

def _enumerate_E(n: int, allowed: Iterable[tuple] | None = None) -> Iterator[dict]:
    """Yield exponent maps ``e`` in E_n (optionally supported on ``allowed``).

    The constraints are ``sum e = 2n-1``, ``sum i*e = n``, ``sum j*e = 2n-2``
    and ``e[0,0] = 0``. Subtracting the first from the other two gives a
    weight budget ``sum (i+j-1) e = n-1`` that bounds the depth-first search
    over the pairs with ``i+j >= 2``; ``e[1,0]`` and ``e[0,1]`` are then
    forced by the remaining sums.
    """
    if allowed is None:
        heavy = [(i, s - i) for s in range(n, 1, -1) for i in range(s + 1)]
        has10 = has01 = True
    else:
        allowed = set(allowed)
        heavy = sorted((p for p in allowed if p[0] + p[1] >= 2 and p[0] + p[1] <= n),
                       key=lambda p: (-(p[0] + p[1]), p))
        has10 = (1, 0) in allowed
        has01 = (0, 1) in allowed
    target_cnt = 2 * n - 1
    target_j = 2 * n - 2
    cur: dict = {}

    def dfs(k: int, budget: int, si: int, sj: int, cnt: int):
        if k == len(heavy):
            e10 = n - si
            e01 = target_j - sj
            if e10 < 0 or e01 < 0 or cnt + e10 + e01 != target_cnt:
                return
            if (e10 and not has10) or (e01 and not has01):
                return
            e = dict(cur)
            if e10:
                e[(1, 0)] = e10
            if e01:
                e[(0, 1)] = e01
            yield e
            return
        i, j = heavy[k]
        wgt = i + j - 1
        ecount = 0
        while ecount * wgt <= budget and si + ecount * i <= n and sj + ecount * j <= target_j:
            if ecount:
                cur[(i, j)] = ecount
            yield from dfs(k + 1, budget - ecount * wgt, si + ecount * i, sj + ecount * j, cnt + ecount)
            ecount += 1
        cur.pop((i, j), None)

    yield from dfs(0, n - 1, 0, 0, 0)


def _b_coefficient(n: int, e: Mapping[tuple, int]) -> int:
    e01 = e.get((0, 1), 0)
    num = factorial(n) * factorial(2 * n - 2 - e01) * factorial(e01)
    den = 1
    for (i, j), k in e.items():
        den *= factorial(k) * (factorial(i) * factorial(j)) ** k
    b = Fraction(num, den)
    if b.denominator != 1:
        raise ArithmeticError(f"non-integral b coefficient for n={n}, e={e}")
    sign = -1 if (2 * n - 1 - e01) % 2 else 1
    return sign * b.numerator


@lru_cache(maxsize=None)
def q_terms(n: int, allowed: frozenset | None = None) -> tuple:
    """``(e, b_{n,e})`` pairs of Q_n, optionally restricted to a support set."""
    if n < 1:
        raise ValueError("Q_n needs n >= 1")
    return tuple((tuple(sorted(e.items())), _b_coefficient(n, e))
                 for e in _enumerate_E(n, allowed))


@lru_cache(maxsize=None)
def q_poly(n: int) -> IntPoly:
    """The implicit-derivative polynomial Q_n in the ``w[i,j]``."""
    terms = {}
    for e, b in q_terms(n):
        mono = tuple(sorted((w(i, j), k) for (i, j), k in e))
        terms[mono] = terms.get(mono, 0) + b
    return IntPoly(terms)


def q_eval(n: int, values: Mapping[tuple, object]):
    """Evaluate Q_n at ``w[i,j] = values[(i, j)]``; absent pairs count as zero.

    Only exponent vectors supported on the given pairs are enumerated, which
    keeps large n tractable for polynomials with few nonzero partials.
    """
    support = frozenset(p for p, v in values.items() if v != 0 and p != (0, 0))
    total = 0
    for e, b in q_terms(n, support):
        t = b
        for p, k in e:
            t = t * values[p] ** k
        total = total + t
    return total


# ---------------------------------------------------------------- Psi

@lru_cache(maxsize=None)
def psi_poly(r: int, a: int) -> IntPoly:
    """``Psi[r,a] = Phi[r-1, r-a+1](1, Q_1, Q_2, ...)`` as a polynomial in ``w``."""
    if not 2 <= a <= r:
        raise ValueError(f"need 2 <= a <= r, got r={r}, a={a}")
    phi = phi_poly(r - 1, r - a + 1)
    subs = {y(0): IntPoly.const(1)}
    for k in range(1, a):
        subs[y(k)] = q_poly(k)
    return phi.substitute(subs)


def psi_eval(r: int, a: int, values: Mapping[tuple, object]):
    """Numerically evaluate ``Psi[r,a]`` at ``w[i,j] = values[(i,j)]``.

    Evaluates Phi at the numeric values of Q_k rather than expanding the
    composition, so it stays cheap for large r.
    """
    if not 2 <= a <= r:
        raise ValueError(f"need 2 <= a <= r, got r={r}, a={a}")
    assignment = {y(0): 1}
    for k in range(1, a):
        assignment[y(k)] = q_eval(k, values)
    return eval_intpoly(phi_poly(r - 1, r - a + 1), assignment)


# ---------------------------------------------------------------- evaluation

def eval_intpoly(p: IntPoly, assignment: Mapping[IndexedVar, object]):
    """Evaluate ``p`` with variables replaced from ``assignment``.

    Works for ints, Fractions and mpmath numbers alike; powers are cached per
    variable so each is computed once.
    """
    missing = p.variables() - set(assignment)
    if missing:
        raise KeyError(f"missing variables: {sorted(map(str, missing))}")
    powers: dict = {}
    total = 0
    for m, c in p.terms.items():
        t = c
        for v, e in m:
            key = (v, e)
            if key not in powers:
                powers[key] = assignment[v] ** e
            t = t * powers[key]
        total = total + t
    return total


# ---------------------------------------------------------------- parsing

_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")
_VAR_RE = re.compile(r"^([wy])\[(\d+)(?:,(\d+))?\](?:\^(\d+))?$")


def parse_intpoly(text: str) -> IntPoly:
    """Inverse of ``str(IntPoly)``; accepts ASCII ``-`` or U+2212."""
    text = text.replace("−", "-").strip()
    if text == "0":
        return IntPoly()
    terms: dict = {}
    pos = 0
    for mt in _TERM_RE.finditer(text):
        if mt.start() != pos:
            raise ValueError(f"cannot parse near position {pos}: {text[pos:pos + 20]!r}")
        pos = mt.end()
        sign = -1 if mt.group(1) == "-" else 1
        coeff = 1
        mono: dict = {}
        for factor in mt.group(2).strip().split("*"):
            factor = factor.strip()
            if factor.isdigit():
                coeff *= int(factor)
                continue
            mv = _VAR_RE.match(factor)
            if not mv:
                raise ValueError(f"bad factor {factor!r}")
            fam, i, j, e = mv.groups()
            v = IndexedVar(fam, (int(i),) if j is None else (int(i), int(j)))
            mono[v] = mono.get(v, 0) + (int(e) if e else 1)
        key = tuple(sorted(mono.items()))
        terms[key] = terms.get(key, 0) + sign * coeff
    if pos != len(text):
        raise ValueError(f"trailing input at position {pos}")
    return IntPoly(terms)


def to_mp(x):
    """Convert an int or Fraction to an mpmath number at the current precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpmathify(x)
