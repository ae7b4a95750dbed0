import numpy as np
import pytest

from cosserat_plate.material import MaterialParams, derive_coefficients
from cosserat_plate.mesh import generate_rectangle
from cosserat_plate.operator import build_operator_table

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def material():
    """Generic test material with strong micropolar coupling."""
    return MaterialParams(lam=2.0, mu=1.0, alpha=0.5, beta=0.3, gamma=0.4, epsilon=0.2,
                          thickness=0.1)


@pytest.fixture(scope="session")
def foam_like():
    """Poisson ratio 0.4 and coupling number N^2 = alpha / (mu + alpha) = 0.04."""
    return MaterialParams(lam=4.0, mu=1.0, alpha=1.0 / 24.0, beta=0.3, gamma=0.4,
                          epsilon=0.2, thickness=0.1)


@pytest.fixture(scope="session")
def coeffs(material):
    return derive_coefficients(material)


@pytest.fixture(scope="session")
def table(coeffs):
    return build_operator_table(coeffs)


@pytest.fixture(scope="session")
def square8():
    return generate_rectangle(2.0, 2.0, 8, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
