import numpy as np
import pytest

from entangled_sensing.channels import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def grid_min_two_mode(objective, total, step=1e-4):
    """Brute-force minimum of ``objective(n1, total - n1)`` over ``n1`` on a grid."""
    n1 = np.linspace(0.0, total, int(round(total / step)) + 1)
    vals = objective(n1, total - n1)
    i = int(np.argmin(vals))
    return n1[i], vals[i]


def grid_min_three_mode(objective, total, step=1e-4):
    best = (None, np.inf)
    n1_grid = np.linspace(0.0, total, int(round(total / step)) + 1)
    for n1 in n1_grid:
        rest = total - n1
        n2 = n1_grid[n1_grid <= rest + 1e-15]
        vals = objective(np.full_like(n2, n1), n2, np.maximum(rest - n2, 0.0))
        i = int(np.argmin(vals))
        if vals[i] < best[1]:
            best = ((n1, n2[i], rest - n2[i]), vals[i])
    return best


ACCEPTANCE_LINES = {}


def report(criterion: int, passed: bool, detail: str) -> bool:
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
