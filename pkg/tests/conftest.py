import numpy as np
import pytest

from jsccexp import example_6x4, validate_channel, validate_source


def bsc(eps):
    return validate_channel([[1 - eps, eps], [eps, 1 - eps]])


@pytest.fixture(scope="session")
def example_channel():
    return example_6x4(0.065, 0.01)


@pytest.fixture(scope="session")
def example_source():
    return validate_source([0.972, 0.028])


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    """Log one acceptance verdict; the lines are echoed in the terminal summary."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
