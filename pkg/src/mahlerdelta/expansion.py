"""Coefficients c_r(n) of the expansion Delta_n(P) ~ sum_r c_r(n) / n^r.

The general formula sums over the exceptional set, pairing R_{a+1}(Omega)
with R_a(Li_a(beta/alpha^n)), where R_a is Re for even a and Im for odd a.
Also here: the Stirling-number form for 1 + x + y, closed forms for c_2 and
c_3, partial sums, Richardson-extrapolated empirical coefficients and the
singular-exponent fit for polynomials with a critical point on the circle.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from mpmath import mp

from .bivar import BiPoly, hypothesis_check, is_asr, primitive_part
from .errors import HypothesisError, MahlerError
from .exactalg import eval_intpoly, phi_poly, psi_eval, stirling_first, stirling_second, y
from .mahler import delta_n
from .numerics import DEFAULT_PREC, polylog_unit
from .rootengine import _partials_at, exceptional_set, implicit_derivs

__all__ = [
    "omega_eval", "omega_via_phi", "coefficient", "coefficient_1xy", "closed_c2_c3",
    "CoefficientTable", "build_table", "detect_modulus", "partial_sum", "EmpiricalResult",
    "richardson", "empirical_coefficient", "SingularFit", "fit_singular_exponent",
]


def _R(a: int, z):
    return mpmath.re(z) if a % 2 == 0 else mpmath.im(z)


# ------------------------------------------------------------ Omega

def _w_values(P: BiPoly, alpha, beta, order: int) -> dict:
    raw = _partials_at(P, alpha, beta, order)
    p01 = raw.get((0, 1), 0)
    if p01 == 0:
        raise HypothesisError("P_{0,1} vanishes at (alpha, beta)")
    return {(i, j): alpha ** i * beta ** (j - 1) * v / p01 for (i, j), v in raw.items()}


def omega_eval(P: BiPoly, r: int, a: int, alpha, beta, prec: int = DEFAULT_PREC):
    """Omega_{r,a}(alpha, beta) = Psi_{r,a}(w) with w_{i,j} = alpha^i beta^(j-1) P_{i,j}/P_{0,1}."""
    if not 2 <= a <= r:
        raise ValueError(f"need 2 <= a <= r, got r={r}, a={a}")
    with mp.workprec(prec + 20):
        alpha, beta = mpmath.mpmathify(alpha), mpmath.mpmathify(beta)
        return +psi_eval(r, a, _w_values(P, alpha, beta, r - 1))


def omega_via_phi(P: BiPoly, r: int, a: int, alpha, beta, prec: int = DEFAULT_PREC):
    """Independent route: Phi_{r-1,r-a+1}(rho, x rho', x^2 rho'', ...) / rho^(r-1)."""
    with mp.workprec(prec + 20):
        alpha, beta = mpmath.mpmathify(alpha), mpmath.mpmathify(beta)
        rho = implicit_derivs(P, alpha, beta, max(r - 1, 1), prec)
        vals = {y(0): beta}
        for k in range(1, r):
            vals[y(k)] = alpha ** k * rho[k - 1]
        return +(eval_intpoly(phi_poly(r - 1, r - a + 1), vals) / beta ** (r - 1))


# ------------------------------------------------------------ coefficients

def _prepare(P: BiPoly, prec: int):
    """Exceptional set of P, after checking the critical-point hypothesis.

    Returns ``None`` for almost self-reciprocal P (all coefficients vanish).
    The hypothesis is checked on P with its x-content removed, which leaves
    Delta_n unchanged.
    """
    if is_asr(P) is not None:
        return None
    _, Q = primitive_part(P)
    if Q.deg_y < 1 or is_asr(Q) is not None:
        return None
    rep = hypothesis_check(Q, prec=prec)
    if not rep.passed:
        raise HypothesisError(f"critical-point hypothesis fails: {rep.code}")
    return Q, exceptional_set(Q, prec)


def _li_at(a: int, e, n: int, prec: int):
    # beta / alpha^n through angles, so large n loses no precision
    ang = (e.beta.angle - n * e.alpha.angle) % (2 * mp.pi)
    return polylog_unit(a, mpmath.expj(ang), prec)


@lru_cache(maxsize=4096)
def _coefficient_cached(P: BiPoly, r: int, n: int, prec: int):
    prep = _prepare(P, prec)
    if prep is None:
        return mpmath.mpf(0)
    Q, pts = prep
    with mp.workprec(prec + 20):
        total = mpmath.mpf(0)
        for e in pts:
            if e.sign == 0:
                continue
            inner = mpmath.fsum(
                _R(a + 1, omega_eval(Q, r, a, e.alpha.value, e.beta.value, prec)) * _R(a, _li_at(a, e, n, prec))
                for a in range(2, r + 1))
            total += e.sign * inner
        return +(total / mp.pi)


def coefficient(P: BiPoly, r: int, n: int, prec: int = DEFAULT_PREC):
    """c_r(n) by the general formula over the exceptional set."""
    if r < 2:
        raise ValueError("r must be at least 2 (c_1 vanishes identically)")
    if n < 1:
        raise ValueError("n must be positive")
    return _coefficient_cached(P, r, n, prec)


@lru_cache(maxsize=4096)
def coefficient_1xy(r: int, n: int, prec: int = DEFAULT_PREC):
    """c_r(n) for P = 1 + x + y, from Stirling numbers and xi = exp(2 pi i/3)."""
    if r < 2:
        raise ValueError("r must be at least 2")
    with mp.workprec(prec + 20):
        third = 2 * mp.pi / 3
        li_arg = mpmath.expj(third * ((n + 1) % 3))
        total = mpmath.mpf(0)
        for a in range(2, r + 1):
            b = r + 1 - a
            inner = mpmath.fsum(stirling_first(j, b) * stirling_second(r - 1, j) * _R(a + 1, mpmath.expj(third * (j % 3)))
                                for j in range(b, r))
            total += (-1) ** b * _R(a, polylog_unit(a, li_arg, prec)) * inner
        return +(2 * total / mp.pi)


def closed_c2_c3(P: BiPoly, n: int, prec: int = DEFAULT_PREC) -> tuple:
    """(c_2(n), c_3(n)) from the closed forms in F = -x P_x/(y P_y) and G."""
    prep = _prepare(P, prec)
    if prep is None:
        return mpmath.mpf(0), mpmath.mpf(0)
    Q, pts = prep
    with mp.workprec(prec + 20):
        c2 = c3 = mpmath.mpf(0)
        for e in pts:
            if e.sign == 0:
                continue
            x, yv = e.alpha.value, e.beta.value
            w = _partials_at(Q, x, yv, 2)
            p10, p01 = w.get((1, 0), 0), w[(0, 1)]
            p20, p11, p02 = w.get((2, 0), 0), w.get((1, 1), 0), w.get((0, 2), 0)
            F = -x * p10 / (yv * p01)
            G = (-p20 / p01 + 2 * p10 * p11 / p01 ** 2 - p02 * p10 ** 2 / p01 ** 3) * x ** 2 / yv + F - F ** 2
            li2, li3 = _li_at(2, e, n, prec), _li_at(3, e, n, prec)
            c2 += e.sign * mpmath.im(F) * mpmath.re(li2)
            c3 += e.sign * (mpmath.im(F ** 2) * mpmath.re(li2) + mpmath.re(G) * mpmath.im(li3))
        return +(c2 / mp.pi), +(c3 / mp.pi)


# ------------------------------------------------------------ tables

@dataclass
class CoefficientTable:
    """c_r(n) keyed by ``(r, n mod modulus)`` when a modulus exists, else ``(r, n)``."""

    poly: BiPoly
    entries: dict = field(default_factory=dict)
    modulus: int | None = None
    precision: int = DEFAULT_PREC

    def key(self, r: int, n: int) -> tuple:
        return (r, n % self.modulus) if self.modulus else (r, n)

    def get(self, r: int, n: int):
        try:
            return self.entries[self.key(r, n)]
        except KeyError:
            raise MahlerError(f"coefficient table has no entry for r={r}, n={n}") from None

    @property
    def rmax(self) -> int:
        return max((r for r, _ in self.entries), default=1)


def detect_modulus(P: BiPoly, prec: int = DEFAULT_PREC, max_modulus: int = 720) -> int | None:
    """Least M with alpha^M = 1 for every alpha in the exceptional set.

    Returns 1 for an empty set and ``None`` when no M up to ``max_modulus`` works.
    """
    prep = _prepare(P, prec)
    if prep is None or not prep[1]:
        return 1
    with mp.workprec(prec):
        tol = mpmath.mpf(2) ** (-prec // 2)
        fracs = [e.alpha.angle / (2 * mp.pi) for e in prep[1]]
        for M in range(1, max_modulus + 1):
            if all(abs(M * f - mpmath.nint(M * f)) < tol for f in fracs):
                return M
    return None


def build_table(P: BiPoly, rmax: int, prec: int = DEFAULT_PREC, ns=None,
                coeff_fn=None) -> CoefficientTable:
    """Compute c_r for 2 <= r <= rmax over every residue class, or over ``ns``.

    With a modulus M, each class is evaluated at two representatives and
    the results are required to agree.
    """
    coeff_fn = coeff_fn or (lambda r, n: coefficient(P, r, n, prec))
    M = detect_modulus(P, prec) if ns is None else None
    table = CoefficientTable(P, {}, M, prec)
    if ns is None and M is None:
        raise MahlerError("no residue-class modulus found; pass explicit n values")
    if M is not None:
        tol = mpmath.mpf(2) ** (-prec // 2)
        for cls in range(M):
            n0 = cls if cls else M
            for r in range(2, rmax + 1):
                v = coeff_fn(r, n0)
                v2 = coeff_fn(r, n0 + M)
                if abs(v - v2) > tol * (1 + abs(v)):
                    raise MahlerError(f"c_{r} is not periodic modulo {M}")
                table.entries[(r, cls)] = v
    else:
        for n in ns:
            for r in range(2, rmax + 1):
                table.entries[(r, n)] = coeff_fn(r, n)
    return table


def partial_sum(table: CoefficientTable, k: int, n: int):
    """p_k(n) = sum_{r=2}^{k} c_r(n) / n^r; zero for k < 2."""
    with mp.workprec(table.precision + 20):
        return +mpmath.fsum(table.get(r, n) / mpmath.mpf(n) ** r for r in range(2, k + 1))


# ------------------------------------------------------------ empirical checks

@dataclass
class EmpiricalResult:
    limit: mpmath.mpf
    sequence: list
    n_list: list
    order: int
    extrapolations: list  # successive Richardson estimates, one per added point


def richardson(ns: list, values: list, order: int | None = None):
    """Polynomial extrapolation to h = 1/n = 0 through the last ``order + 1`` points (Neville)."""
    if order is None:
        order = min(4, len(ns) - 1)
    hs = [mpmath.mpf(1) / n for n in ns[-(order + 1):]]
    p = list(values[-(order + 1):])
    m = len(p)
    for j in range(1, m):
        for i in range(m - 1, j - 1, -1):
            p[i] = (hs[i - j] * p[i] - hs[i] * p[i - 1]) / (hs[i - j] - hs[i])
    return p[-1]


def delta_job(args: tuple):
    """``delta_n(*args)``; a top-level callable so process pools can pickle it."""
    return delta_n(*args)


def empirical_coefficient(P: BiPoly, k: int, n_class: int, modulus: int, n_list: list,
                          prec: int = DEFAULT_PREC, table: CoefficientTable | None = None,
                          mapper=map) -> EmpiricalResult:
    """Extrapolate n^k (Delta_n - p_{k-1}(n)) along ``n_list`` to estimate c_k(n_class).

    ``mapper`` evaluates the Delta_n sweep, e.g. ``executor.map``.
    """
    if any(n % modulus != n_class % modulus for n in n_list):
        raise ValueError("every n must lie in the given residue class")
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be increasing")
    if k > 2 and table is None:
        table = build_table(P, k - 1, prec)
    seq = []
    deltas = list(mapper(delta_job, [(P, n, prec) for n in n_list]))
    with mp.workprec(prec + 20):
        for n, res in zip(n_list, deltas):
            d = res.value
            p = partial_sum(table, k - 1, n) if k > 2 else 0
            seq.append(+(mpmath.mpf(n) ** k * (d - p)))
        order = min(4, len(n_list) - 1)
        ext = [richardson(n_list[:m], seq[:m], min(4, m - 1)) for m in range(2, len(n_list) + 1)]
        return EmpiricalResult(richardson(n_list, seq, order), seq, list(n_list), order, ext)


@dataclass
class SingularFit:
    slope: float
    amplitudes: dict  # residue class -> c(n) in Delta_n ~ c(n) n^slope
    class_slopes: dict
    rms_residual: float
    data: list  # (n, Delta_n)


def fit_singular_exponent(P: BiPoly, n_range, modulus: int, prec: int = 53,
                          target_err=1e-13, mapper=map) -> SingularFit:
    """Fit Delta_n ~ c(n mod modulus) * n^s by least squares on log|Delta_n|.

    One slope is shared by all classes, with a separate intercept per class.
    Intended for polynomials with a critical point on the circle, so the
    quadrature always splits at critical angles.
    """
    ns = list(n_range)
    results = mapper(delta_job, [(P, n, prec, target_err, True) for n in ns])
    data = [(n, float(d.value), float(d.error_bound)) for n, d in zip(ns, results)]
    usable = [(n, v) for n, v, e in data if abs(v) > 10 * max(e, 1e-300) and abs(v) > 1e-12]
    if len(usable) < 3:
        raise MahlerError("Delta_n below the noise floor; nothing to fit")
    classes = sorted({n % modulus for n, _ in usable})
    col = {c: i for i, c in enumerate(classes)}
    A = np.zeros((len(usable), 1 + len(classes)))
    b = np.zeros(len(usable))
    for row, (n, v) in enumerate(usable):
        A[row, 0] = np.log(n)
        A[row, 1 + col[n % modulus]] = 1.0
        b[row] = np.log(abs(v))
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.sqrt(np.mean((A @ sol - b) ** 2)))
    amps, slopes = {}, {}
    for c in classes:
        pts = [(n, v) for n, v in usable if n % modulus == c]
        sgn = np.sign(np.median([v for _, v in pts]))
        amps[c] = float(sgn * np.exp(sol[1 + col[c]]))
        if len(pts) >= 2:
            slopes[c] = float(np.polyfit(np.log([n for n, _ in pts]), np.log([abs(v) for _, v in pts]), 1)[0])
    return SingularFit(float(sol[0]), amps, slopes, resid, [(n, v) for n, v, _ in data])
