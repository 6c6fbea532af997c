"""Shared polynomials and the acceptance-report hook."""
from __future__ import annotations

import pytest

from mahlerdelta.bivar import BiPoly

ACCEPTANCE_LINES: list = []


def bp(*terms) -> BiPoly:
    """BiPoly from (i, j, coeff) triples."""
    return BiPoly.from_terms(terms)


ONE_X_Y = bp((0, 0, 1), (1, 0, 1), (0, 1, 1))
Y2_XY_1 = bp((0, 2, 1), (1, 1, 1), (0, 0, 1))
Y2_MINUS_X = bp((0, 2, 1), (1, 0, -1))
Y_MINUS_X = bp((0, 1, 1), (1, 0, -1))
ONE_X_ONE_Y = bp((0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1))
DENINGER = bp((1, 2, 1), (0, 1, 1), (1, 1, 1), (2, 1, 1), (1, 0, 1))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one PASS/FAIL line for an acceptance criterion."""
    def _report(num: int, ok: bool, detail: str) -> None:
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _report
