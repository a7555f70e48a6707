import numpy as np
import pytest

from hjdg.basis import make_basis
from hjdg.mesh import build_cartesian, build_uniform_1d, triangulate_rectangle


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def periodic_interval():
    return build_uniform_1d(0.0, 2 * np.pi, 20, "periodic")


@pytest.fixture
def cart_mesh():
    return build_cartesian(-1.0, 1.0, -1.0, 1.0, 6, 5, ("periodic", "periodic"))


@pytest.fixture
def tri_mesh():
    return triangulate_rectangle(-2.0, 2.0, -2.0, 2.0, 4, 4, pattern="alternating", periodic=True)


def basis_of(kind, k=2):
    return make_basis(kind, k)


# one summary line per acceptance criterion, printed after the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
