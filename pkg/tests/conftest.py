import math

import numpy as np
import pytest

from qtsp.geometry import EuclideanInstance, generate, normalize

ACCEPTANCE_LINES = []


@pytest.fixture
def corners():
    return normalize(EuclideanInstance(points=[(0, 0), (1, 0), (1, 1), (0, 1)], name="corners"))


@pytest.fixture
def triangle():
    return normalize(EuclideanInstance(points=[(0, 0), (1, 0), (0, 1)]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_instance(n, seed):
    return normalize(generate("uniform", n, seed))


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  criterion {criterion:>2}: {detail}")
        print(ACCEPTANCE_LINES[-1])
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


SQRT2 = math.sqrt(2)
