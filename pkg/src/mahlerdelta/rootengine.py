"""Root functions of P(x, y) in y over the unit circle in x.

Implicit derivatives through Q_n, the Maclaurin coefficients of
``f(t) = Log(rho(alpha e^{it}) / beta)``, the crossing sign s(alpha, beta),
the exceptional set Z(P) on the torus, and numerical trajectory tracking
used to cross-validate all of the above.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import mpmath
import numpy as np
from mpmath import mp
from scipy.optimize import brentq, linear_sum_assignment, minimize_scalar

from .bivar import BiPoly, UniPoly, hypothesis_check, is_asr, partial, primitive_part, reciprocal, resultant_y
from .errors import DegenerateInputError, HypothesisError, UndeterminedOrderError
from .exactalg import bell_partial, eval_intpoly, q_eval, stirling_second, y
from .numerics import DEFAULT_PREC, polyroots

__all__ = [
    "UnitPoint", "RootTrajectory", "ExceptionalPoint", "roots_at", "track_roots",
    "exceptional_set", "implicit_derivs", "implicit_derivs_series", "maclaurin_b",
    "conjectured_b", "sign_at", "crossing_report",
]

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class UnitPoint:
    """A point of the unit circle, stored as angle in [0, 2pi) and value."""

    angle: mpmath.mpf
    value: mpmath.mpc

    @classmethod
    def from_value(cls, z, prec: int = DEFAULT_PREC) -> "UnitPoint":
        with mp.workprec(prec):
            z = mpmath.mpc(z)
            ang = mpmath.arg(z)
            if ang < 0:
                ang += 2 * mp.pi
            return cls(ang, z)

    @classmethod
    def from_angle(cls, angle, prec: int = DEFAULT_PREC) -> "UnitPoint":
        with mp.workprec(prec):
            ang = mpmath.mpf(angle) % (2 * mp.pi)
            return cls(ang, mpmath.expj(ang))


@dataclass
class RootTrajectory:
    branch: int
    angles: np.ndarray
    values: np.ndarray
    crossings: list = field(default_factory=list)  # (angle, +1 in->out, -1 out->in, 0 touch)
    arcs: list = field(default_factory=list)  # (start, end, "inside"|"outside"|"on-circle")


@dataclass(frozen=True)
class ExceptionalPoint:
    alpha: UnitPoint
    beta: UnitPoint
    sign: int
    order: int
    b_coeffs: tuple

    def to_json(self) -> dict:
        return {
            "alpha_angle": mpmath.nstr(self.alpha.angle, 20),
            "beta_angle": mpmath.nstr(self.beta.angle, 20),
            "sign": self.sign,
            "order": self.order,
        }


# ------------------------------------------------------------ pointwise roots

def roots_at(P: BiPoly, x0, prec: int = DEFAULT_PREC) -> list:
    """The deg_y(P) roots in y of P(x0, y), unordered."""
    if P.deg_y < 1:
        return []
    with mp.workprec(prec + 10):
        x0 = mpmath.mpmathify(x0)
        cs = [_eval_uni(a, x0) for a in P.y_coeffs()]
        scale = max(abs(c) for c in cs)
        if abs(cs[-1]) <= scale * mpmath.mpf(2) ** (-prec + 16):
            raise DegenerateInputError("leading coefficient in y vanishes at x0")
        if len(cs) == 2:
            return [-cs[0] / cs[1]]
        if len(cs) == 3:
            c, b, a = cs
            disc = mpmath.sqrt(b * b - 4 * a * c)
            q = -(b + disc) / 2 if mpmath.re(mpmath.conj(b) * disc) >= 0 else -(b - disc) / 2
            if q == 0:
                return [mpmath.mpc(0), mpmath.mpc(0)]
            return [q / a, c / q]
    return list(polyroots(cs, prec).roots)


def _eval_uni(a: UniPoly, x):
    acc = mpmath.mpc(0)
    for c in reversed(a.coeffs):
        acc = acc * x + mpmath.mpmathify(c)
    return acc


# ------------------------------------------------------------ derivatives

@lru_cache(maxsize=4096)
def _partial_cached(P: BiPoly, i: int, j: int) -> BiPoly:
    return partial(P, i, j)


def _partials_at(P: BiPoly, alpha, beta, order: int) -> dict:
    out = {}
    for i in range(order + 1):
        for j in range(order + 1 - i):
            D = _partial_cached(P, i, j)
            if not D.is_zero():
                out[(i, j)] = D.eval_mp(alpha, beta)
    return out


def implicit_derivs(P: BiPoly, alpha, beta, kmax: int, prec: int = DEFAULT_PREC) -> list:
    """``[rho'(alpha), ..., rho^(kmax)(alpha)]`` for the root function through (alpha, beta).

    Uses rho^(n) = Q_n(w) / w_{0,1}^(2n-1) with w_{i,j} the raw partials of P.
    """
    with mp.workprec(prec + 20):
        alpha, beta = mpmath.mpmathify(alpha), mpmath.mpmathify(beta)
        w = _partials_at(P, alpha, beta, kmax)
        w01 = w.get((0, 1), 0)
        scale = max([abs(v) for v in w.values()] + [mpmath.mpf(1)])
        if abs(w01) <= scale * mpmath.mpf(2) ** (-prec // 2):
            raise HypothesisError("dP/dy vanishes at (alpha, beta): critical point")
        out = [q_eval(n, w) / w01 ** (2 * n - 1) for n in range(1, kmax + 1)]
    return [+v for v in out]


def implicit_derivs_series(P: BiPoly, alpha, beta, kmax: int, prec: int = DEFAULT_PREC) -> list:
    """Independent oracle for ``implicit_derivs``: solve P(alpha+h, beta+T(h)) = 0
    order by order in h for the power series T, then read off k! t_k.
    """
    with mp.workprec(prec + 20):
        alpha, beta = mpmath.mpmathify(alpha), mpmath.mpmathify(beta)
        C = {k: v / (factorial(k[0]) * factorial(k[1]))
             for k, v in _partials_at(P, alpha, beta, kmax).items()}
        c01 = C.get((0, 1), 0)
        if c01 == 0:
            raise HypothesisError("dP/dy vanishes at (alpha, beta): critical point")
        t = [mpmath.mpc(0)] * (kmax + 1)
        jmax = max((j for _, j in C), default=0)
        for k in range(1, kmax + 1):
            # powers of T truncated at order k, with t_k still zero
            powers = [[mpmath.mpc(1)] + [mpmath.mpc(0)] * k]
            for _ in range(jmax):
                prev = powers[-1]
                powers.append([mpmath.fsum(prev[a] * t[m - a] for a in range(m)) for m in range(k + 1)])
            s = mpmath.mpc(0)
            for (i, j), c in C.items():
                if i <= k:
                    s += c * powers[j][k - i]
            t[k] = -s / c01
        return [+(factorial(k) * t[k]) for k in range(1, kmax + 1)]


def _g_derivs(P, alpha, beta, kmax, prec):
    # g(t) = rho(alpha e^{it}); (d/dt)^k = i^k (x d/dx)^k = i^k sum_j S(k,j) x^j D^j
    rho = implicit_derivs(P, alpha, beta, kmax, prec)
    return [mpmath.mpc(0, 1) ** k * mpmath.fsum(stirling_second(k, j) * alpha ** j * rho[j - 1]
                                                for j in range(1, k + 1))
            for k in range(1, kmax + 1)], rho


def maclaurin_b(P: BiPoly, alpha, beta, kmax: int, prec: int = DEFAULT_PREC) -> list:
    """Maclaurin coefficients ``[b_0, b_1, ..., b_kmax]`` of f(t) = Log(rho(alpha e^{it})/beta).

    Exact composition: chain rule for t -> alpha e^{it}, implicit derivatives
    of rho, and Faa di Bruno (partial Bell polynomials) for the logarithm.
    """
    if isinstance(alpha, UnitPoint):
        alpha = alpha.value
    if isinstance(beta, UnitPoint):
        beta = beta.value
    with mp.workprec(prec + 20):
        alpha, beta = mpmath.mpmathify(alpha), mpmath.mpmathify(beta)
        g, _ = _g_derivs(P, alpha, beta, kmax, prec)
        u = {y(k): g[k - 1] / beta for k in range(1, kmax + 1)}
        b = [mpmath.mpc(0)]
        for k in range(1, kmax + 1):
            fk = mpmath.fsum((-1) ** (j - 1) * factorial(j - 1) * eval_intpoly(bell_partial(k, j), u)
                             for j in range(1, k + 1))
            b.append(fk / factorial(k))
    return [+v for v in b]


def conjectured_b(P: BiPoly, alpha, beta, kmax: int, prec: int = DEFAULT_PREC) -> list:
    """The unproven closed form ``i^k/k! sum_j S(k,j) rho^(j)(alpha) beta^(j-1)``.

    Optional cross-check only; ``sign_at`` never relies on it.
    """
    with mp.workprec(prec + 20):
        alpha, beta = mpmath.mpmathify(alpha), mpmath.mpmathify(beta)
        rho = implicit_derivs(P, alpha, beta, kmax, prec)
        out = [mpmath.mpc(0)]
        for k in range(1, kmax + 1):
            s = mpmath.fsum(stirling_second(k, j) * rho[j - 1] * beta ** (j - 1) for j in range(1, k + 1))
            out.append(mpmath.mpc(0, 1) ** k * s / factorial(k))
    return out


def sign_at(P: BiPoly, alpha, beta, kmax: int = 8, prec: int = DEFAULT_PREC) -> tuple:
    """Crossing sign s(alpha, beta) and order N, plus the b coefficients.

    Returns ``(sign, N, b)``. N is the least k with |Re b_k| above 2^(-prec/2).
    """
    b = maclaurin_b(P, alpha, beta, kmax, prec)
    tol = mpmath.mpf(2) ** (-prec // 2)
    for k in range(1, kmax + 1):
        re = mpmath.re(b[k])
        if abs(re) > tol:
            if k % 2 == 0:
                return 0, k, tuple(b)
            return (1 if re > 0 else -1), k, tuple(b)
    raise UndeterminedOrderError(
        f"Re(b_k) below tolerance for all k <= {kmax}",
        {"b": [mpmath.nstr(v, 15) for v in b]},
    )


# ------------------------------------------------------------ exceptional set

def _newton_polish(P: BiPoly, Ps: BiPoly, a, b, prec: int):
    # 2D Newton on (P, P*); returned only if the residual improves
    Px, Py = _partial_cached(P, 1, 0), _partial_cached(P, 0, 1)
    Qx, Qy = _partial_cached(Ps, 1, 0), _partial_cached(Ps, 0, 1)

    def resid(u, v):
        return abs(P.eval_mp(u, v)) + abs(Ps.eval_mp(u, v))

    best = (resid(a, b), a, b)
    for _ in range(8):
        f, g = P.eval_mp(a, b), Ps.eval_mp(a, b)
        j11, j12, j21, j22 = Px.eval_mp(a, b), Py.eval_mp(a, b), Qx.eval_mp(a, b), Qy.eval_mp(a, b)
        det = j11 * j22 - j12 * j21
        if abs(det) < mpmath.mpf(2) ** (-prec // 4):
            break
        a = a - (j22 * f - j12 * g) / det
        b = b - (j11 * g - j21 * f) / det
        r = resid(a, b)
        if r < best[0]:
            best = (r, a, b)
        else:
            break
    return best[1], best[2]


@lru_cache(maxsize=256)
def _exceptional_cached(P: BiPoly, prec: int, kmax: int) -> tuple:
    if P.is_zero():
        raise DegenerateInputError("zero polynomial")
    if is_asr(P) is not None:
        return ()
    _, Q = primitive_part(P)
    if Q.deg_y < 1 or is_asr(Q) is not None:
        return ()
    Qs = reciprocal(Q)
    R = resultant_y(Q, Qs)
    if R.is_zero():
        raise DegenerateInputError("Res_y(P, P*) vanishes identically: P shares a factor with P*; factor P first")
    if R.degree < 1:
        return ()
    out = []
    with mp.workprec(prec + 20):
        tol = mpmath.mpf(2) ** (-prec // 2)
        for a in polyroots(R.squarefree().coeffs, prec).roots:
            if abs(abs(a) - 1) > tol:
                continue
            a = a / abs(a)
            for b in roots_at(Q, a, prec):
                if abs(abs(b) - 1) > tol:
                    continue
                scale = 1 + sum(abs(mpmath.mpmathify(c)) for c in Qs.coeffs.values())
                if abs(Qs.eval_mp(a, b)) > tol * scale:
                    continue
                a2, b2 = _newton_polish(Q, Qs, a, b, prec)
                a2, b2 = a2 / abs(a2), b2 / abs(b2)
                s, N, bc = sign_at(Q, a2, b2, kmax, prec)
                out.append(ExceptionalPoint(UnitPoint.from_value(a2, prec), UnitPoint.from_value(b2, prec),
                                            s, N, bc))
    out.sort(key=lambda e: (float(e.alpha.angle), float(e.beta.angle)))
    return tuple(out)


def exceptional_set(P: BiPoly, prec: int = DEFAULT_PREC, kmax: int = 8) -> list:
    """Isolated zeros of P on the torus, each with its crossing sign.

    Empty for almost self-reciprocal P. A factor depending on x alone is
    removed first; it cannot create isolated torus zeros.
    """
    return list(_exceptional_cached(P, prec, kmax))


# ------------------------------------------------------------ tracking

def _y_coeff_arrays(P: BiPoly) -> list:
    return [np.array([complex(c) for c in a.coeffs] or [0j]) for a in P.y_coeffs()]


def _np_roots(cols: list, z: complex) -> np.ndarray:
    cs = [np.polyval(a[::-1], z) for a in cols]
    return np.roots(cs[::-1])


def _track_point(cols, theta, guess):
    r = _np_roots(cols, np.exp(1j * theta))
    return r[np.argmin(np.abs(r - guess))]


def track_roots(P: BiPoly, grid_size: int = 512, tol: float = 1e-9, margin: float = 1e-7,
                check_hypothesis: bool = True) -> list:
    """Follow the root functions rho_j(e^{it}) for t in [0, 2pi) in double precision.

    Roots are matched between grid points by optimal assignment. Each
    trajectory carries its crossing angles of |rho| = 1 (refined with
    Brent's method), tangential touches, and sub-arcs labelled inside,
    outside or on-circle. A critical point on the circle raises
    HypothesisError unless ``check_hypothesis`` is off; a grid sample
    landing near one raises regardless.
    """
    _, Q = primitive_part(P)
    d = Q.deg_y
    if d < 1:
        return []
    if check_hypothesis and d > 1:
        rep = hypothesis_check(Q, prec=128)
        if not rep.passed:
            raise HypothesisError(f"{rep.code}: tracking needs distinct roots on the whole circle")
    cols = _y_coeff_arrays(Q)
    # offset grid: exceptional angles are often rational multiples of pi
    thetas = np.linspace(0, TWO_PI, grid_size + 1) + 0.3819660112501051 * TWO_PI / grid_size
    vals = np.empty((grid_size + 1, d), dtype=complex)
    prev = None
    for k, th in enumerate(thetas):
        r = _np_roots(cols, np.exp(1j * th))
        if len(r) != d:
            raise DegenerateInputError("leading coefficient in y vanishes on the unit circle")
        if d > 1:
            gap = np.min(np.abs(r[:, None] - r[None, :]) + np.eye(d) * 1e300)
            if gap < margin:
                raise HypothesisError(f"root collision at angle {th:.12g}: critical point on the circle")
        if prev is not None:
            _, perm = linear_sum_assignment(np.abs(prev[:, None] - r[None, :]))
            r = r[perm]
        vals[k] = r
        prev = r
    step = thetas[1] - thetas[0]
    out = []
    for j in range(d):
        traj = RootTrajectory(j, thetas, vals[:, j].copy())
        m = np.abs(vals[:, j]) - 1

        def h(th, k0):
            return abs(_track_point(cols, th, vals[k0, j])) - 1

        events = []
        for k in range(grid_size):
            if abs(m[k]) < tol and abs(m[k + 1]) < tol:
                continue
            if m[k] * m[k + 1] < 0:
                root = brentq(h, thetas[k], thetas[k + 1], args=(k,), xtol=1e-14)
                events.append((root, 1 if m[k] < 0 else -1))
            elif (0 < k and abs(m[k]) < abs(m[k - 1]) and abs(m[k]) <= abs(m[k + 1])
                  and m[k - 1] * m[k] > 0 and m[k] * m[k + 1] > 0):
                res = minimize_scalar(lambda th: abs(h(th, k)), bounds=(thetas[k] - step, thetas[k] + step),
                                      method="bounded", options={"xatol": 1e-13})
                if res.fun < 1e-9 and not any(abs(res.x - e[0]) < step for e in events):
                    events.append((float(res.x), 0))
        traj.crossings = sorted(events)
        traj.arcs = _classify_arcs(thetas, m, tol)
        out.append(traj)
    return out


def _classify_arcs(thetas, m, tol) -> list:
    labels = np.where(np.abs(m) < tol, 0, np.sign(m)).astype(int)
    names = {0: "on-circle", -1: "inside", 1: "outside"}
    arcs = []
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            arcs.append((float(thetas[start]), float(thetas[k - 1]), names[labels[start]]))
            start = k
    # single grid points at |rho| ~ 1 between off-circle arcs are crossings, not arcs
    return [a for a in arcs if not (a[2] == "on-circle" and a[0] == a[1])]


def crossing_report(P: BiPoly, grid_size: int = 512, prec: int = DEFAULT_PREC) -> list:
    """Match every exceptional point with a tracked crossing.

    Returns ``[(point, direction or None)]`` where direction is the observed
    +1/-1/0 for the trajectory passing through beta at alpha.
    """
    pts = exceptional_set(P, prec)
    trajs = track_roots(P, grid_size)
    out = []
    for e in pts:
        a_ang = float(e.alpha.angle)
        b_val = complex(e.beta.value)
        # an order-N crossing pins its angle only to about eps^(1/N)
        ang_tol = 10.0 ** (-10 / e.order)
        found, best = None, np.inf
        for t in trajs:
            for ang, direction in t.crossings:
                dist = abs((ang - a_ang + np.pi) % TWO_PI - np.pi)
                k = int(np.argmin(np.abs((t.angles - ang + np.pi) % TWO_PI - np.pi)))
                if dist < ang_tol and abs(t.values[k] - b_val) < 0.1 and dist < best:
                    found, best = direction, dist
        out.append((e, found))
    return out
