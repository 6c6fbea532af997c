import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from mahlerdelta.errors import ConvergenceError
from mahlerdelta.mahler import mahler_univariate
from mahlerdelta.numerics import gauss_legendre, polylog_unit, polyroots, polyval_deriv


def _sorted(roots):
    return sorted(roots, key=lambda z: (float(mpmath.re(z)), float(mpmath.im(z))))


def test_polyroots_examples():
    with mp.workprec(256):
        r = _sorted(polyroots([1, 0, 1], 256).roots)
        assert abs(r[0] + 1j) < mpmath.mpf(2) ** -240 and abs(r[1] - 1j) < mpmath.mpf(2) ** -240
        (z,) = polyroots([1, 2], 256).roots
        assert abs(z + mpmath.mpf(1) / 2) < mpmath.mpf(2) ** -240


def test_polyroots_jensen_cross_check():
    rs = polyroots([1, 1, 0, 1], 256)
    with mp.workprec(256):
        prod = mpmath.fprod(max(abs(z), 1) for z in rs.roots)
        assert abs(mpmath.log(prod) - mahler_univariate([1, 1, 0, 1], 256).value) < mpmath.mpf(10) ** -70


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=7, unique=True))
def test_polyroots_recovers_gaussian_integer_roots(rts):
    cs = [mpmath.mpc(1)]
    for a, b in rts:  # multiply by (z - (a + bi))
        r = mpmath.mpc(a, b)
        cs = [(cs[k - 1] if k > 0 else 0) - r * (cs[k] if k < len(cs) else 0) for k in range(len(cs) + 1)]
    res = polyroots(cs, 128)
    assert len(res) == len(rts)
    for z, resid, bound in zip(res.roots, res.residuals, res.bounds):
        assert resid <= bound
    for a, b in rts:
        assert min(abs(z - mpmath.mpc(a, b)) for z in res.roots) < 1e-30


def test_polyroots_zero_roots_and_determinism():
    a = polyroots([0, 0, 1, 1], 128)
    b = polyroots([0, 0, 1, 1], 128)
    assert a.roots == b.roots
    assert sum(1 for z in a.roots if z == 0) == 2


def test_polyroots_high_degree():
    cs = [1, 1] + [0] * 299 + [1]  # 1 + x + x^301
    rs = polyroots(cs, 128)
    assert len(rs) == 301
    assert max(rs.residuals) < 1e-25


def test_polyval_deriv():
    p, dp = polyval_deriv([1, 2, 3], 2)
    assert (p, dp) == (17, 14)


def test_polylog_examples():
    with mp.workprec(256):
        assert abs(polylog_unit(2, 1, 256) - mp.pi ** 2 / 6) < mpmath.mpf(2) ** -240
        xi = mpmath.expj(2 * mp.pi / 3)
        assert abs(mpmath.re(polylog_unit(2, xi, 256)) + mp.pi ** 2 / 18) < mpmath.mpf(2) ** -240
        assert polylog_unit(5, 0, 256) == 0


def test_polylog_brute_force_oracle():
    # direct summation of sum z^n / n^3 at double precision
    import cmath
    z = cmath.exp(0.7j)
    direct = sum(z ** n / n ** 3 for n in range(1, 1_000_001))
    got = complex(polylog_unit(3, mpmath.expj(mpmath.mpf("0.7")), 53))
    assert abs(got - direct) < 1e-11


@pytest.mark.parametrize("k", [2, 3, 4, 7])
@pytest.mark.parametrize("z", [0.3 + 0.2j, -0.7 + 0.1j, 0.74j, 0.9 - 0.3j, complex(mpmath.expj(1.3)), -1, 0.999j])
def test_polylog_matches_mpmath(k, z):
    with mp.workprec(200):
        want = mpmath.polylog(k, mpmath.mpc(z))
        got = polylog_unit(k, mpmath.mpc(z), 180)
        assert abs(got - want) <= mpmath.mpf(2) ** -170 * max(1, abs(want))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.floats(0, 1), st.floats(-3.14159, 3.14159))
def test_polylog_conjugate_symmetry(k, r, t):
    with mp.workprec(128):
        z = r * mpmath.expj(t)
        a = polylog_unit(k, mpmath.conj(z), 128)
        b = mpmath.conj(polylog_unit(k, z, 128))
        assert abs(a - b) < mpmath.mpf(2) ** -110


def test_polylog_precision_refinement():
    with mp.workprec(256):
        z = mpmath.expj(mpmath.mpf("2.1"))
        lo, hi = polylog_unit(2, z, 128), polylog_unit(2, z, 256)
        assert abs(lo - hi) <= mpmath.mpf(2) ** -(128 - 8) * abs(hi)


def test_polylog_rejects_bad_input():
    with pytest.raises(ValueError):
        polylog_unit(1, 0.5)
    with pytest.raises(ValueError):
        polylog_unit(2, 1.5)


def test_gauss_legendre_exactness():
    nodes, weights = gauss_legendre(32, 200)
    with mp.workprec(200):
        assert abs(mpmath.fsum(weights) - 2) < mpmath.mpf(10) ** -55
        # exact for x^62
        got = mpmath.fsum(wt * x ** 62 for x, wt in zip(nodes, weights))
        assert abs(got - mpmath.mpf(2) / 63) < mpmath.mpf(10) ** -55


def test_convergence_error_carries_diagnostics():
    e = ConvergenceError("stalled", {"iterations": 3})
    assert e.exit_code == 4 and e.diagnostics == {"iterations": 3}
