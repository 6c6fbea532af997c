"""Delta_n(1 + x + y) against its truncated expansion.

Prints n^2 Delta_n next to the c_2 limit for each residue class, then the
n^4 remainder column, where the error in Delta_n is magnified by n^4.
Run with ``python3 demos/boyd_and_table4.py``.
"""
import mpmath
from mpmath import mp

from mahlerdelta.bivar import BiPoly
from mahlerdelta.expansion import coefficient_1xy
from mahlerdelta.mahler import delta_n

PREC = 256
P = BiPoly.from_terms([(0, 0, 1), (1, 0, 1), (0, 1, 1)])

with mp.workprec(PREC):
    print("n    n^2*Delta_n           c_2(n)")
    for n in (10, 11, 12, 100, 101, 102):
        d = delta_n(P, n, PREC).value
        print(f"{n:<4} {mpmath.nstr(n ** 2 * d, 18):<21} {mpmath.nstr(coefficient_1xy(2, n, PREC), 18)}")

    # a shift of 1e-17 in Delta_n moves the last column by n^4 * 1e-17
    print("\nn    n^4*(Delta_n - c2/n^2 - c3/n^3)   effect of a 1e-17 shift")
    for n in (61, 121, 181, 241, 301):
        d = delta_n(P, n, PREC).value
        N = mpmath.mpf(n)
        rem = N ** 4 * (d - coefficient_1xy(2, n, PREC) / N ** 2 - coefficient_1xy(3, n, PREC) / N ** 3)
        print(f"{n:<4} {mpmath.nstr(rem, 16):<33} {float(N ** 4 * 1e-17):.1e}")
