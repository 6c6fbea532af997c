from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DENINGER, ONE_X_ONE_Y, ONE_X_Y, Y2_MINUS_X, Y2_XY_1, Y_MINUS_X, bp
from mahlerdelta.bivar import (BiPoly, GaussRational, UniPoly, critical_resultant, hypothesis_check, is_asr,
                               partial, primitive_part, reciprocal, resultant_y, resultant_y_euclid,
                               substitute_curve, x_content)
from mahlerdelta.errors import DegenerateInputError

coeff = st.builds(GaussRational, st.integers(-4, 4), st.integers(-2, 2))
small_poly = st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), coeff, min_size=1, max_size=7) \
    .map(BiPoly).filter(lambda P: not P.is_zero())
# P** = P needs P free of monomial factors (otherwise the degrees drop)
unit_free = small_poly.filter(lambda P: min(i for i, _ in P.coeffs) == 0 and min(j for _, j in P.coeffs) == 0)


def U(*cs):
    return UniPoly([GaussRational(c) for c in cs])


def test_gauss_rational_arithmetic():
    a, b = GaussRational(1, 2), GaussRational(Fraction(1, 2), -1)
    assert a * b == GaussRational(Fraction(5, 2), Fraction(0))
    assert (a / b) * b == a
    assert a.conjugate() == GaussRational(1, -2)
    assert GaussRational(3) == 3 and a - a == 0
    assert complex(a) == 1 + 2j


def test_partial_examples():
    assert partial(ONE_X_Y, 1, 0) == bp((0, 0, 1))
    assert partial(ONE_X_Y, 0, 2).is_zero()
    assert partial(bp((1, 2, 1)), 1, 1) == bp((0, 1, 2))


def test_reciprocal_examples():
    assert reciprocal(ONE_X_Y) == bp((1, 0, 1), (0, 1, 1), (1, 1, 1))
    assert reciprocal(ONE_X_ONE_Y) == ONE_X_ONE_Y
    assert reciprocal(Y_MINUS_X) == bp((1, 0, 1), (0, 1, -1))
    assert reciprocal(bp((0, 0, GaussRational(0, 1)), (1, 1, 1))) == bp((1, 1, GaussRational(0, -1)), (0, 0, 1))


def test_is_asr_examples():
    assert is_asr(ONE_X_ONE_Y) == 1
    assert is_asr(Y_MINUS_X) == -1
    assert is_asr(ONE_X_Y) is None
    assert is_asr(DENINGER) == 1


@settings(max_examples=60, deadline=None)
@given(unit_free)
def test_reciprocal_involution_and_degrees(P):
    Ps = reciprocal(P)
    assert reciprocal(Ps) == P
    assert (Ps.deg_x, Ps.deg_y) == (P.deg_x, P.deg_y)


@settings(max_examples=30, deadline=None)
@given(unit_free)
def test_asr_implies_empty_exceptional_set(P):
    from mahlerdelta.rootengine import exceptional_set
    PPs = P * reciprocal(P)  # always a.s.r. with c = 1
    assert is_asr(PPs) == 1
    if PPs.deg_y >= 1:
        assert exceptional_set(PPs, 128) == []


def test_resultant_examples():
    assert resultant_y(ONE_X_Y, bp((0, 0, 1))) == U(1)
    assert resultant_y(Y2_MINUS_X, bp((0, 1, 2))) == U(0, -4)
    assert resultant_y(Y2_XY_1, bp((0, 1, 2), (1, 0, 1))) == U(4, 0, -1)
    with pytest.raises(DegenerateInputError):
        resultant_y(bp((1, 0, 1)), bp((0, 0, 2)))


@settings(max_examples=25, deadline=None)
@given(small_poly, small_poly)
def test_resultant_routes_agree(A, B):
    if A.deg_y + B.deg_y == 0:
        return
    assert resultant_y(A, B) == resultant_y_euclid(A, B)


@settings(max_examples=25, deadline=None)
@given(small_poly)
def test_discriminant_routes_agree(P):
    if P.deg_y < 1:
        return
    assert resultant_y(P, partial(P, 0, 1)) == resultant_y_euclid(P, partial(P, 0, 1))


def test_critical_resultant_examples():
    assert critical_resultant(ONE_X_Y) == U(1)
    assert critical_resultant(Y2_XY_1) == U(4, 0, -1)
    R = critical_resultant(DENINGER)
    with mpmath.workprec(128):
        for s in (1, -1):
            z = mpmath.expj(s * mpmath.pi / 3)
            assert abs(mpmath.polyval([mpmath.mpmathify(c) for c in reversed(R.coeffs)], z)) < 1e-30


def test_hypothesis_check_examples():
    assert hypothesis_check(ONE_X_Y).passed
    assert hypothesis_check(Y2_XY_1).passed
    rep = hypothesis_check(DENINGER)
    assert not rep.passed and rep.code == "critical point on T"
    with mpmath.workprec(256):
        angles = sorted(mpmath.arg(z) for z in rep.offending)
        assert abs(angles[0] + mpmath.pi / 3) < 1e-60 and abs(angles[1] - mpmath.pi / 3) < 1e-60
    assert rep.to_json()["hypothesis"] == "fail"


def test_hypothesis_check_degenerate():
    # (y - x)^2 shares a factor with its y-derivative
    P = bp((0, 2, 1), (1, 1, -2), (2, 0, 1))
    rep = hypothesis_check(P)
    assert not rep.passed and rep.code == "degenerate resultant"


def test_substitute_curve_examples():
    assert substitute_curve(ONE_X_Y, 1) == U(1, 2)
    assert substitute_curve(ONE_X_Y, 3) == U(1, 1, 0, 1)
    with pytest.raises(DegenerateInputError):
        substitute_curve(Y_MINUS_X, 1)


def test_primitive_part_strips_x_content():
    P = bp((0, 0, 2), (1, 0, 1), (0, 1, 2), (1, 1, 1))  # (2 + x)(1 + y)
    c, Q = primitive_part(P)
    assert c == U(2, 1)
    assert Q == bp((0, 0, 1), (0, 1, 1))
    assert x_content(ONE_X_Y) == U(1)


def test_unipoly_gcd_and_squarefree():
    a = U(-1, 0, 1)  # x^2 - 1
    b = U(1, 2, 1)   # (x + 1)^2
    assert a.gcd(b) == U(1, 1)
    assert b.squarefree() == U(1, 1)
    q, r = a.divmod(U(1, 1))
    assert q == U(-1, 1) and r.is_zero()


def test_json_roundtrip():
    P = bp((0, 0, GaussRational(Fraction(1, 2), 3)), (2, 1, -1))
    assert BiPoly.from_json(P.to_json()) == P
    assert hash(BiPoly.from_json(P.to_json())) == hash(P)


def test_eval_mp():
    with mpmath.workprec(100):
        assert ONE_X_Y.eval_mp(mpmath.mpc(2), mpmath.mpc(3)) == 6
