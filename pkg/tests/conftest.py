import sys

import pytest

from singdrift.coeffspec import INF, PiecewisePower, PowerPiece


def f_delta(delta):
    return PiecewisePower.symmetric_power(1.0, delta - 1.0)


@pytest.fixture
def bessel_f():
    return f_delta(1.5)


@pytest.fixture
def skew_f():
    return PiecewisePower.step(1.0, 3.0)


@pytest.fixture
def sqrt_right_f():
    # 1 on the left, sqrt(x) on the right; vanishes at 0 from the right only
    return PiecewisePower([PowerPiece(-INF, 0.0, 1.0), PowerPiece(0.0, INF, 1.0, 0.5, 0.0)])


@pytest.fixture
def one():
    return PiecewisePower.constant(1.0)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for k, m in sys.modules.items() if k.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"AC{n:<2d} {'PASS' if ok else 'FAIL'}  {detail}")
