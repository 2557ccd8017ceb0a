import numpy as np
import pytest

from treegibbs.grid import build_rule
from treegibbs.kernels import build_family, kernel_from_xi


@pytest.fixture(scope="session")
def rule():
    return build_rule(200)


@pytest.fixture(scope="session")
def ones_kernel(rule):
    return kernel_from_xi("zero", 1.0, 1.0, rule)


@pytest.fixture(scope="session")
def k3_kernel(rule):
    return build_family("k3_family", rule)


@pytest.fixture(scope="session")
def k4_kernel(rule):
    return build_family("k_ge4_family", rule, k=4)


@pytest.fixture(scope="session")
def k2_kernel():
    return build_family("k2_family", build_rule(200, "gauss_legendre_split"), n=2)


@pytest.fixture(scope="session")
def four_cycle_kernel(rule):
    return build_family("four_cycle_family", rule, k=100)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


ACCEPTANCE_LINES = []


def record_acceptance(number: int, title: str, passed: bool, detail: str = "") -> bool:
    """Remember one criterion outcome; printed once in the terminal summary."""
    line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'} {title}"
    if detail:
        line += f" | {detail}"
    ACCEPTANCE_LINES.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
