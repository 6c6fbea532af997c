"""Mahler measures: one variable by Jensen's formula, two variables by
integrating the root functions over the circle, the curve measure
m(P(x, x^n)), and their difference Delta_n(P).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from mpmath import mp

from .bivar import BiPoly, UniPoly, critical_resultant, is_asr, primitive_part, substitute_curve
from .errors import ConvergenceError, DegenerateInputError
from .numerics import DEFAULT_PREC, gauss_legendre, polyroots
from .rootengine import exceptional_set, roots_at

__all__ = ["MeasureResult", "mahler_univariate", "mahler_bivariate", "mahler_curve", "delta_n",
           "JENSEN_MAX_DEGREE"]

JENSEN_MAX_DEGREE = 4096
GL_ORDER = 32


@dataclass(frozen=True)
class MeasureResult:
    """A Mahler measure with a refinement-based error estimate (not a rigorous bound)."""

    value: mpmath.mpf
    error_bound: mpmath.mpf
    method: str  # "jensen", "quadrature", "jensen-quadrature" or "convention"
    panels: int = 0

    def to_json(self, digits: int = 40) -> dict:
        return {
            "value": mpmath.nstr(self.value, digits),
            "error_bound": mpmath.nstr(self.error_bound, 5),
            "method": self.method,
            "panels": self.panels,
        }


def _floor(prec: int):
    return mpmath.mpf(2) ** (-prec + 10)


def mahler_univariate(p, prec: int = DEFAULT_PREC) -> MeasureResult:
    """``log|a| + sum log+|alpha_j|`` over the roots of p.

    ``p`` is a UniPoly or a coefficient list, lowest degree first. The error
    bound converts each root residual into a distance to a true root.
    """
    coeffs = list(p.coeffs) if isinstance(p, UniPoly) else list(p)
    with mp.workprec(prec + 20):
        cs = [mpmath.mpmathify(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise DegenerateInputError("Mahler measure of the zero polynomial")
        lc = cs[-1]
        val = mpmath.log(abs(lc))
        err = _floor(prec)
        if len(cs) > 1 and prec <= 53:
            v, e = _jensen_double(cs, prec)
            return MeasureResult(+(val + v), +(err + e), "jensen", 0)
        if len(cs) > 1:
            rs = polyroots(cs, prec)
            d = len(rs.roots)
            for z, res in zip(rs.roots, rs.residuals):
                az = abs(z)
                if az > 1:
                    val += mpmath.log(az)
                # distance to the nearest true root, from the residual
                dp = abs(mpmath.polyval(list(reversed(_deriv(cs))), z)) if len(cs) > 2 else abs(lc)
                dist = min(res / dp if dp else mpmath.inf, (res / abs(lc)) ** (mpmath.mpf(1) / d))
                if az + dist > 1:
                    err += dist / max(min(az, 1) - dist, mpmath.mpf("0.5"))
        return MeasureResult(+val, +err, "jensen", 0)


def _jensen_double(cs: list, prec: int) -> tuple:
    # sum log+|root| and its error estimate, vectorised in double precision
    rs = polyroots(cs, prec)
    z = np.array([complex(r) for r in rs.roots])
    res = np.array([float(r) for r in rs.residuals])
    c = np.array([complex(v) for v in cs])[::-1]
    d = len(cs) - 1
    az = np.abs(z)
    with np.errstate(all="ignore"):
        dp = np.abs(np.polyval(np.polyder(c), z))
        dist = np.minimum(np.where(dp > 0, res / dp, np.inf), (res / abs(c[0])) ** (1.0 / d))
        contrib = dist / np.maximum(np.minimum(az, 1.0) - dist, 0.5)
    val = float(np.sum(np.log(az[az > 1])))
    err = float(np.sum(contrib[az + dist > 1])) + d * 2.0 ** -52 * max(1.0, val)
    return mpmath.mpf(val), mpmath.mpf(err)


def _deriv(cs):
    return [k * c for k, c in enumerate(cs)][1:]


# ------------------------------------------------------------ bivariate

def _integrand_factory(Q: BiPoly, prec: int):
    d = Q.deg_y
    cols = [[mpmath.mpmathify(c) for c in a.coeffs] for a in Q.y_coeffs()]

    def horner(cs, x):
        acc = mpmath.mpc(0)
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    def f(t):
        x = mpmath.expj(t)
        if d == 1:
            a0, a1 = horner(cols[0], x), horner(cols[1], x)
            r = abs(a0) / abs(a1)
            return mpmath.log(r) if r > 1 else mpmath.mpf(0)
        total = mpmath.mpf(0)
        for z in roots_at(Q, x, prec):
            az = abs(z)
            if az > 1:
                total += mpmath.log(az)
        return total

    return f


def _unit_angles(poly: UniPoly, prec: int, tol) -> list:
    if poly.degree < 1:
        return []
    out = []
    for z in polyroots(poly.squarefree().coeffs, prec).roots:
        if abs(abs(z) - 1) < tol:
            a = mpmath.arg(z)
            out.append(a + 2 * mp.pi if a < 0 else a)
    return out


def _breakpoints(Q: BiPoly, prec: int, allow_critical: bool) -> list:
    tol = mpmath.mpf(2) ** (-prec // 2)
    pts = [mpmath.mpf(0), 2 * mp.pi]
    if is_asr(Q) is None:
        pts += [e.alpha.angle for e in exceptional_set(Q, prec)]
    pts += _unit_angles(Q.y_coeffs()[-1], prec, tol)
    if allow_critical:
        pts += _unit_angles(critical_resultant(Q), prec, tol)
    pts = sorted(pts)
    out = [pts[0]]
    for p in pts[1:]:
        if p - out[-1] > tol:
            out.append(p)
    return out


def _gl_panel(f, a, b, nodes, weights):
    h = (b - a) / 2
    m = (a + b) / 2
    return h * mpmath.fsum(w * f(m + h * x) for x, w in zip(nodes, weights))


def adaptive_quad(f, breaks: list, target_err, prec: int, max_panels: int = 20000) -> tuple:
    """Adaptive composite Gauss-Legendre with bisection.

    Returns ``(value, error_estimate, panel_count)``. Each panel is accepted
    once its estimate and the sum over its two halves differ by less than
    its share of ``target_err``; the error estimate is 4x the summed
    differences.
    """
    nodes, weights = gauss_legendre(GL_ORDER, prec + 20)
    total_len = breaks[-1] - breaks[0]
    stack = []
    for a, b in zip(breaks[:-1], breaks[1:]):
        stack.append((a, b, _gl_panel(f, a, b, nodes, weights), 0))
    value, err, panels = mpmath.mpf(0), mpmath.mpf(0), 0
    min_width = total_len * mpmath.mpf(2) ** (-prec // 2)
    while stack:
        a, b, whole, depth = stack.pop()
        m = (a + b) / 2
        left, right = _gl_panel(f, a, m, nodes, weights), _gl_panel(f, m, b, nodes, weights)
        diff = abs(left + right - whole)
        share = target_err * (b - a) / total_len
        if diff <= share or b - a < min_width:
            value += left + right
            err += diff
            panels += 2
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
        if len(stack) + panels > max_panels:
            raise ConvergenceError("quadrature panel budget exhausted",
                                   {"panels": panels, "partial_value": mpmath.nstr(value, 20)})
    return value, err, panels


@lru_cache(maxsize=128)
def _bivariate_cached(P: BiPoly, target_err: str, prec: int, allow_critical: bool) -> MeasureResult:
    target = mpmath.mpf(target_err)
    c, Q = primitive_part(P)
    with mp.workprec(prec + 20):
        base = mahler_univariate(c, prec) if c.degree >= 1 else None
        if Q.deg_y < 1:
            mq = mahler_univariate(Q.y_coeffs()[0], prec)
            val = mq.value + (base.value if base else 0)
            err = mq.error_bound + (base.error_bound if base else 0)
            return MeasureResult(+val, +err, "jensen", 0)
        lead = mahler_univariate(Q.y_coeffs()[-1], prec)
        f = _integrand_factory(Q, prec)
        breaks = _breakpoints(Q, prec, allow_critical)
        integral, diff, panels = adaptive_quad(f, breaks, target * 2 * mp.pi / 4, prec)
        val = lead.value + integral / (2 * mp.pi) + (base.value if base else 0)
        err = 4 * diff / (2 * mp.pi) + lead.error_bound + (base.error_bound if base else 0) + _floor(prec)
        return MeasureResult(+val, +err, "quadrature", panels)


def mahler_bivariate(P: BiPoly, target_err=None, prec: int = DEFAULT_PREC,
                     allow_critical: bool = False) -> MeasureResult:
    """m(P) = m(a_d) + (1/2pi) int sum_j log+|rho_j(e^{it})| dt.

    Panels are split at the angles of the exceptional set and at zeros of
    a_d on the circle; ``allow_critical`` also splits at critical angles, for
    polynomials that fail the critical-point hypothesis. A factor in x alone
    is measured separately by Jensen's formula.
    """
    if P.is_zero():
        raise DegenerateInputError("Mahler measure of the zero polynomial")
    if target_err is None:
        target_err = mpmath.mpf(2) ** (-prec // 3)
    return _bivariate_cached(P, mpmath.nstr(mpmath.mpf(target_err), 20), prec, allow_critical)


# ------------------------------------------------------------ curve and delta

def _curve_quadrature(cs: list, prec: int, target_err) -> MeasureResult:
    # log|p(e^{it})| on a uniform mesh refined until two levels agree
    deg = len(cs) - 1
    poly = np.array([complex(c) for c in reversed(cs)])
    nodes, weights = np.polynomial.legendre.leggauss(GL_ORDER)
    prev = None
    panels = 4 * deg
    for _ in range(8):
        edges = np.linspace(0, 2 * np.pi, panels + 1)
        h = (edges[1:] - edges[:-1])[:, None] / 2
        mid = (edges[1:] + edges[:-1])[:, None] / 2
        t = mid + h * nodes[None, :]
        vals = np.log(np.abs(np.polyval(poly, np.exp(1j * t))) + 1e-300)
        cur = float(np.sum(h * weights[None, :] * vals)) / (2 * np.pi)
        if prev is not None and abs(cur - prev) < float(target_err):
            return MeasureResult(mpmath.mpf(cur), mpmath.mpf(4 * abs(cur - prev)) + mpmath.mpf(2) ** -40,
                                 "quadrature", panels)
        prev = cur
        panels *= 2
    raise ConvergenceError("curve quadrature did not converge", {"panels": panels, "value": prev})


def mahler_curve(P: BiPoly, n: int, prec: int = DEFAULT_PREC, target_err=None) -> MeasureResult:
    """m(P(x, x^n)); Jensen's formula up to degree 4096, quadrature beyond."""
    p = substitute_curve(P, n)
    if p.degree <= JENSEN_MAX_DEGREE:
        return mahler_univariate(p, prec)
    if target_err is None:
        target_err = 1e-12
    return _curve_quadrature(list(p.coeffs), prec, target_err)


def _is_y_minus_power(P: BiPoly):
    # c * (y - x^k) times a factor in x alone makes P(x, x^k) vanish identically
    _, Q = primitive_part(P)
    if len(Q.coeffs) != 2 or Q.deg_y != 1:
        return None
    cy = Q.coeffs.get((0, 1))
    rest = [(k, c) for k, c in Q.coeffs.items() if k != (0, 1)]
    if cy is None or rest[0][0][1] != 0 or rest[0][1] != -cy:
        return None
    return rest[0][0][0]


def delta_n(P: BiPoly, n: int, prec: int = DEFAULT_PREC, target_err=None,
            allow_critical: bool = False) -> MeasureResult:
    """Delta_n(P) = m(P(x, x^n)) - m(P(x, y)) with the two error bounds added.

    When P(x, x^n) vanishes identically, P is c(y - x^n) up to a factor in
    x alone, and Delta_n is 0 by the usual limiting convention
    (m(x^N - x^n) = m(y - x^n) = 0 for every N).
    """
    if n < 1:
        raise ValueError("n must be positive")
    try:
        curve = mahler_curve(P, n, prec)
    except DegenerateInputError:
        if _is_y_minus_power(P) == n:
            return MeasureResult(mpmath.mpf(0), _floor(prec), "convention", 0)
        raise
    surf = mahler_bivariate(P, target_err, prec, allow_critical)
    with mp.workprec(prec + 20):
        return MeasureResult(+(curve.value - surf.value), +(curve.error_bound + surf.error_bound),
                             f"{curve.method}-{surf.method}", surf.panels)
