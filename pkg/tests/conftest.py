import math

import numpy as np
import pytest

# a = 2 pi, omega = 1: T = 1, x = tanh^2 r = e^-1
X_UNIT = math.exp(-1.0)
MEAN_UNIT = 1.0 / (math.e - 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def geometric_mean_occupation(x, cutoff):
    """sum n (1-x) x^n / sum (1-x) x^n over n <= cutoff, by direct summation."""
    w = [(1 - x) * x**n for n in range(cutoff + 1)]
    return sum(n * wn for n, wn in enumerate(w)) / sum(w)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
