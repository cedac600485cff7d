import numpy as np
import pytest

from nmqubits.algebra import SystemParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def fig1_params():
    return SystemParams.symmetric(gamma=1.0, omega=0.5, kappa=1.0, j_xy=0.7, j_z=0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density(rng, rank=4):
    a = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
