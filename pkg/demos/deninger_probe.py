"""Singular exponent of Delta_n for a polynomial with a critical point on the torus.

The coefficient formula does not apply here. A least-squares fit of
log|Delta_n| = s log n + a(n mod 6) suggests s close to -3/2.
Run with ``python3 demos/deninger_probe.py`` (about half a minute).
"""
from concurrent.futures import ProcessPoolExecutor

from mahlerdelta.parsing import parse_poly
from mahlerdelta.expansion import fit_singular_exponent

P = parse_poly("1 + x + 1/x + y + 1/y").poly

if __name__ == "__main__":
    with ProcessPoolExecutor() as pool:
        fit = fit_singular_exponent(P, range(20, 401), 6, mapper=pool.map)
    print(f"shared slope   {fit.slope:.4f}")
    print(f"rms residual   {fit.rms_residual:.4f}")
    for c in sorted(fit.amplitudes):
        print(f"class {c}: amplitude {fit.amplitudes[c]:+.4f}  own slope {fit.class_slopes[c]:.4f}")
