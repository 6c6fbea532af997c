"""Asymptotics of Mahler measures along the curves y = x^n.

For a two-variable polynomial P, ``Delta_n(P) = m(P(x, x^n)) - m(P(x, y))``
has an expansion in powers of 1/n whose coefficients c_r(n) depend on n
periodically. This package computes both sides: the measures themselves,
and the coefficients through the exceptional set of P on the torus.
"""
from .bivar import BiPoly, GaussRational, UniPoly, hypothesis_check, is_asr, reciprocal, resultant_y
from .errors import ConvergenceError, DegenerateInputError, HypothesisError, MahlerError
from .expansion import (CoefficientTable, build_table, closed_c2_c3, coefficient, coefficient_1xy,
                        empirical_coefficient, fit_singular_exponent, omega_eval, partial_sum)
from .mahler import MeasureResult, delta_n, mahler_bivariate, mahler_curve, mahler_univariate
from .numerics import DEFAULT_PREC, polylog_unit, polyroots
from .parsing import parse_poly
from .rootengine import ExceptionalPoint, exceptional_set, implicit_derivs, maclaurin_b, sign_at, track_roots

__version__ = "0.1.0"
