"""Exceptional points and their signs for a few polynomials.

Each sign comes from the Maclaurin coefficients of log(rho(alpha e^{it}) / beta);
the last column is the direction observed by tracking the root functions
around the circle in double precision.
Run with ``python3 demos/sign_engine.py``.
"""
import mpmath

from mahlerdelta.parsing import parse_poly
from mahlerdelta.rootengine import crossing_report

for expr in ("1+x+y", "y^2+x*y+1", "2*y^2+x*y+3*y+1", "3+2x+2y+xy", "(1+x)(1+y)"):
    P = parse_poly(expr).poly
    rows = crossing_report(P, prec=128)
    print(f"{expr}: {len(rows)} exceptional point(s)")
    for e, seen in rows:
        a = mpmath.nstr(e.alpha.angle / (2 * mpmath.pi), 8)
        b = mpmath.nstr(e.beta.angle / (2 * mpmath.pi), 8)
        print(f"  alpha/2pi={a:<11} beta/2pi={b:<11} sign={e.sign:+d} order={e.order} tracked={seen}")
