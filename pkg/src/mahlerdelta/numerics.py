"""Configurable-precision numerics: polynomial roots, polylogarithms, quadrature nodes.

Every routine takes its precision in bits as an explicit ``prec`` argument and
runs inside ``mpmath.workprec``; nothing here reads or mutates the ambient
mpmath precision on return.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
import mpmath
import numpy as np
from mpmath import mp

from .errors import ConvergenceError

__all__ = [
    "BigComplex", "DEFAULT_PREC", "RootSet", "polyroots", "polyval_deriv",
    "polylog_unit", "gauss_legendre",
]

BigComplex = mpmath.mpc
DEFAULT_PREC = 256


def polyval_deriv(coeffs: Sequence, z):
    """Return ``(p(z), p'(z))`` for lowest-first ``coeffs`` by Horner's rule."""
    p = coeffs[-1]
    dp = 0
    for c in reversed(coeffs[:-1]):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _abs_horner(coeffs: Sequence, r):
    s = 0
    for c in reversed(coeffs):
        s = s * r + abs(c)
    return s


@dataclass(frozen=True)
class RootSet:
    """Roots of ``leading_coeff * prod(x - roots[k])`` with their residuals.

    ``residuals[k] = |p(roots[k])|`` and ``bounds[k]`` is the advertised
    ceiling it was checked against (a few ulps of ``sum |c_j| |root|^j``).
    """

    roots: tuple
    residuals: tuple
    bounds: tuple
    leading_coeff: object
    prec: int

    def __len__(self) -> int:
        return len(self.roots)


# ------------------------------------------------------------ root finding

def _initial_radii(absc: np.ndarray) -> np.ndarray:
    """Bini's starting radii from the upper convex hull of (k, log|c_k|)."""
    d = len(absc) - 1
    with np.errstate(divide="ignore"):
        logs = np.log(absc)
    pts = [k for k in range(d + 1) if np.isfinite(logs[k])]
    hull: list = []
    for k in pts:
        while len(hull) >= 2:
            k1, k2 = hull[-2], hull[-1]
            # drop k2 if it lies on or below the chord k1 -> k
            if (logs[k2] - logs[k1]) * (k - k1) <= (logs[k] - logs[k1]) * (k2 - k1):
                hull.pop()
            else:
                break
        hull.append(k)
    radii = np.empty(d)
    for a, b in zip(hull[:-1], hull[1:]):
        radii[a:b] = np.exp((logs[a] - logs[b]) / (b - a))
    return radii


def _seeds(coeffs: np.ndarray) -> np.ndarray:
    d = len(coeffs) - 1
    radii = _initial_radii(np.abs(coeffs))
    k = np.arange(d)
    # fixed angular offset keeps seeds off the real axis and reproducible
    ang = 2 * np.pi * k / d + 0.7 / d + 0.4
    return radii * np.exp(1j * ang)


def _polyval(p: np.ndarray, z: np.ndarray) -> np.ndarray:
    # Horner for dense p, a direct power sum for sparse ones such as P(x, x^n)
    nz = np.flatnonzero(p)
    if 8 * len(nz) >= len(p):
        return np.polyval(p, z)
    expo = len(p) - 1 - nz
    return (p[nz] * z[..., None] ** expo).sum(axis=-1)


def _newton_ratio(p: np.ndarray, z: np.ndarray) -> tuple:
    """``p(z)/p'(z)`` and a backward-error test, overflow-free for |z| > 1.

    ``p`` is highest-degree first. Outside the unit disk both are evaluated
    through the reversed polynomial in w = 1/z, using
    p(z) = z^d rev(w) and p'(z) = z^(d-1) (d rev(w) - w rev'(w)).
    """
    d = len(p) - 1
    eps = np.finfo(float).eps
    out = np.abs(z) > 1
    ratio = np.empty_like(z)
    stalled = np.empty(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        zi = z[~out]
        pz, dpz = _polyval(p, zi), _polyval(np.polyder(p), zi)
        ratio[~out] = pz / dpz
        stalled[~out] = np.abs(pz) <= 4 * d * eps * _polyval(np.abs(p), np.abs(zi))
        r = p[::-1]
        wo = 1 / z[out]
        rw, drw = _polyval(r, wo), _polyval(np.polyder(r), wo)
        ratio[out] = rw / (wo * (d * rw - wo * drw))
        stalled[out] = np.abs(rw) <= 4 * d * eps * _polyval(np.abs(r), np.abs(wo))
    return ratio, stalled


def _aberth_double(coeffs: np.ndarray, maxiter: int = 500):
    d = len(coeffs) - 1
    p = coeffs[::-1]
    z = _seeds(coeffs)
    active = np.ones(d, dtype=bool)
    for _ in range(maxiter):
        idx = np.flatnonzero(active)
        if not len(idx):
            return z, True
        # a residual at rounding level also stops a root: multiple roots
        # reach it long before their Newton steps become tiny
        ratio, stalled = _newton_ratio(p, z[idx])
        with np.errstate(all="ignore"):
            diff = z[idx, None] - z[None, :]
            diff[np.arange(len(idx)), idx] = np.inf
            s = (1.0 / diff).sum(axis=1)
            step = ratio / (1.0 - ratio * s)
        finite = np.isfinite(step)
        step[~finite] = 0.0
        z[idx] -= step
        done = stalled | (finite & (np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(z[idx]))))
        active[idx[done]] = False
    return z, not active.any()


def _double_roots(coeffs: list) -> np.ndarray:
    c = np.array([complex(x) for x in coeffs], dtype=complex)
    scale = np.max(np.abs(c))
    c = c / scale
    z, ok = _aberth_double(c)
    if not ok or not np.all(np.isfinite(z)):
        z = np.roots(c[::-1])
    return z


def _mpf_to_gmp(v) -> gmpy2.mpfr:
    sign, man, exp, _ = v._mpf_
    if not man:
        return gmpy2.mpfr(0)
    return gmpy2.mul_2exp(gmpy2.mpfr(-man if sign else man), exp)


def _to_gmp(x) -> gmpy2.mpc:
    x = mpmath.mpc(x)
    return gmpy2.mpc(_mpf_to_gmp(x.real), _mpf_to_gmp(x.imag))


def _from_gmp(z: gmpy2.mpc):
    def part(v):
        m, e = v.as_mantissa_exp()
        return mpmath.mpf((int(m), int(e)))
    return mpmath.mpc(part(z.real), part(z.imag))


def _aberth_mp(coeffs: list, seeds: list, prec: int, maxiter: int):
    """Aberth-Ehrlich refinement at ``prec`` bits (gmpy2 arithmetic).

    p/p' is evaluated in full precision; the pairwise repulsion sum only
    perturbs an already tiny Newton step, so it is formed in double
    precision from the current iterates.
    """
    d = len(seeds)
    with gmpy2.context(gmpy2.get_context(), precision=prec + 20):
        cs = [_to_gmp(c) for c in coeffs]
        dcs = [cs[k] * k for k in range(1, len(cs))]
        z = [_to_gmp(s) for s in seeds]
        tol = gmpy2.mpfr(2) ** (-prec - 4)
        done = [False] * d
        for it in range(maxiter):
            zd = np.array([complex(v) for v in z])
            with np.errstate(all="ignore"):
                diff = zd[:, None] - zd[None, :]
                np.fill_diagonal(diff, np.inf)
                inv = 1.0 / diff
                inv[~np.isfinite(inv)] = 0.0
                sums = inv.sum(axis=1)
            for k in range(d):
                if done[k]:
                    continue
                zk = z[k]
                pz = cs[-1]
                for c in reversed(cs[:-1]):
                    pz = pz * zk + c
                if pz == 0:
                    done[k] = True
                    continue
                dpz = dcs[-1]
                for c in reversed(dcs[:-1]):
                    dpz = dpz * zk + c
                if dpz == 0:
                    z[k] = zk * (1 + tol) + tol
                    continue
                ratio = pz / dpz
                step = ratio / (1 - ratio * gmpy2.mpc(complex(sums[k])))
                z[k] = zk - step
                if abs(step) <= tol * max(1, abs(z[k])):
                    done[k] = True
            if all(done):
                return [_from_gmp(v) for v in z], True
        return [_from_gmp(v) for v in z], False


def polyroots(coeffs: Sequence, prec: int = DEFAULT_PREC, maxiter: int = 80) -> RootSet:
    """All complex roots of the polynomial with lowest-first ``coeffs``.

    Double-precision Aberth-Ehrlich iteration from Newton-polygon seeds
    (companion-matrix eigenvalues if that stalls), then Aberth-Ehrlich
    refinement at ``prec`` bits. Roots at zero are split off exactly.

    Raises
    ------
    ConvergenceError
        If a residual exceeds its bound after refinement and the
        doubled-precision companion fallback.
    """
    with mp.workprec(prec + 20):
        cs = [mpmath.mpmathify(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if len(cs) < 2:
            raise ValueError("polyroots needs degree >= 1")
        nzero = 0
        while cs[nzero] == 0:
            nzero += 1
        core = cs[nzero:]
        lead = cs[-1]
        d = len(core) - 1
        if d == 0:
            roots: list = []
        elif d == 1:
            roots = [-core[0] / core[1]]
        else:
            if prec <= 53:
                return _polyroots_double(cs, core, nzero, lead, prec)
            seeds = [mpmath.mpc(complex(z)) for z in _double_roots(core)]
            roots, ok = _aberth_mp(core, seeds, prec, maxiter)
            if not ok and not _residuals_ok(core, roots, prec):
                roots = _companion_fallback(core, prec)
        allroots = [mpmath.mpc(0)] * nzero + list(roots)
        residuals, bounds = [], []
        slack = mpmath.mpf(2) ** (-prec + 16)
        for z in allroots:
            val, _ = polyval_deriv(cs, z)
            residuals.append(abs(val))
            bounds.append(slack * _abs_horner(cs, abs(z)))
        bad = [k for k in range(len(allroots)) if residuals[k] > bounds[k]]
        if bad:
            raise ConvergenceError(
                f"{len(bad)} of {len(allroots)} roots exceed their residual bound",
                {"roots": allroots, "residuals": residuals, "bounds": bounds},
            )
        return RootSet(tuple(allroots), tuple(residuals), tuple(bounds), lead, prec)


def _polyroots_double(cs: list, core: list, nzero: int, lead, prec: int) -> RootSet:
    # double precision throughout; residual bounds allow d * 2^-37 relative slack
    z = _double_roots(core)
    c = np.array([complex(v) for v in core])[::-1]
    with np.errstate(all="ignore"):
        res = np.abs(np.polyval(c, z))
        bnd = (len(cs) * 2.0 ** -37) * np.polyval(np.abs(c), np.abs(z))
    bad = np.flatnonzero(~(res <= bnd))
    allroots = [mpmath.mpc(0)] * nzero + [mpmath.mpc(complex(v)) for v in z]
    residuals = [mpmath.mpf(0)] * nzero + [mpmath.mpf(float(v)) for v in res]
    bounds = [mpmath.mpf(0)] * nzero + [mpmath.mpf(float(v)) for v in bnd]
    if len(bad):
        raise ConvergenceError(f"{len(bad)} of {len(allroots)} roots exceed their residual bound",
                               {"roots": allroots, "residuals": residuals, "bounds": bounds})
    return RootSet(tuple(allroots), tuple(residuals), tuple(bounds), lead, prec)


def _residuals_ok(coeffs, roots, prec) -> bool:
    slack = mpmath.mpf(2) ** (-prec + 16)
    return all(abs(polyval_deriv(coeffs, z)[0]) <= slack * _abs_horner(coeffs, abs(z)) for z in roots)


def _companion_fallback(coeffs: list, prec: int) -> list:
    d = len(coeffs) - 1
    with mp.workprec(2 * prec + 20):
        lead = coeffs[-1]
        m = mpmath.zeros(d, d)
        for i in range(1, d):
            m[i, i - 1] = 1
        for i in range(d):
            m[i, d - 1] = -coeffs[i] / lead
        ev = mpmath.eig(m, left=False, right=False)
        return [mpmath.mpc(e) for e in ev]


# ------------------------------------------------------------ polylogarithms

@lru_cache(maxsize=None)
def _zeta_over_factorial(k: int, j: int, prec: int):
    with mp.workprec(prec):
        return mpmath.zeta(k - j) / mpmath.factorial(j)


@lru_cache(maxsize=None)
def _harmonic(m: int, prec: int):
    with mp.workprec(prec):
        return mpmath.fsum(mpmath.mpf(1) / i for i in range(1, m + 1))


def polylog_unit(k: int, z, prec: int = DEFAULT_PREC):
    """Principal-branch ``Li_k(z)`` for ``k >= 2`` on the closed unit disk.

    Direct series for ``|z| <= 3/4``; otherwise the expansion in
    ``mu = log z`` about ``z = 1``::

        Li_k(e^mu) = sum_{j != k-1} zeta(k-j) mu^j / j!
                     + mu^(k-1)/(k-1)! * (H_{k-1} - log(-mu)),

    which converges for ``|mu| < 2 pi``.
    """
    if k < 2:
        raise ValueError("polylog_unit needs k >= 2")
    work = prec + 24
    with mp.workprec(work):
        z = mpmath.mpmathify(z)
        az = abs(z)
        if az > 1 + mpmath.mpf(2) ** (-prec // 2):
            raise ValueError(f"|z| = {mpmath.nstr(az, 8)} is outside the closed unit disk")
        eps = mpmath.mpf(2) ** (-work)
        if az <= mpmath.mpf(3) / 4:
            total = mpmath.mpc(0)
            zn = z
            n = 1
            while True:
                term = zn / mpmath.mpf(n) ** k
                total += term
                if abs(zn) / n ** k < eps * max(abs(total), eps):
                    break
                n += 1
                zn *= z
            result = total
        else:
            mu = mpmath.log(z)
            if mu == 0:
                result = mpmath.mpc(mpmath.zeta(k))
            else:
                total = (mu ** (k - 1) / mpmath.factorial(k - 1)) * (_harmonic(k - 1, work) - mpmath.log(-mu))
                muj = mpmath.mpc(1)
                j = 0
                small = 0
                while True:
                    if j != k - 1:
                        term = _zeta_over_factorial(k, j, work) * muj
                        total += term
                        if j > k and abs(term) < eps * abs(total):
                            small += 1
                            # zeta(k-j) vanishes for even negative arguments
                            if small >= 2:
                                break
                        else:
                            small = 0
                    j += 1
                    muj *= mu
                    if j > 20 * work:
                        raise ConvergenceError("polylog series did not converge", {"k": k, "z": z})
                result = total
    with mp.workprec(prec):
        return +mpmath.mpc(result)


# ------------------------------------------------------------ quadrature nodes

@lru_cache(maxsize=None)
def gauss_legendre(order: int, prec: int) -> tuple:
    """Nodes and weights of the ``order``-point Gauss-Legendre rule on [-1, 1]."""
    with mp.workprec(prec + 30):
        nodes, weights = [], []
        tol = mpmath.mpf(2) ** (-prec - 20)
        for i in range(1, (order + 1) // 2 + 1):
            x = mpmath.cos(mpmath.pi * (i - mpmath.mpf(1) / 4) / (order + mpmath.mpf(1) / 2))
            for _ in range(200):
                p0, p1 = mpmath.mpf(1), x
                for n in range(2, order + 1):
                    p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
                dp = order * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < tol:
                    break
            p0, p1 = mpmath.mpf(1), x
            for n in range(2, order + 1):
                p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
            dp = order * (x * p1 - p0) / (x * x - 1)
            wgt = 2 / ((1 - x * x) * dp * dp)
            nodes.extend([x, -x] if abs(x) > tol else [x])
            weights.extend([wgt, wgt] if abs(x) > tol else [wgt])
    with mp.workprec(prec):
        return tuple(+n for n in nodes), tuple(+w for w in weights)
