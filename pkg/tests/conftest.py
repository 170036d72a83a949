import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from simplexft import shapes
from simplexft.mesh import validate_boundary

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_square():
    return validate_boundary(shapes.square_loop(1.0))


@pytest.fixture
def cube_boundary():
    return validate_boundary(shapes.cube_surface())


def random_simplex(rng, j, d, lo=0.1, hi=0.9):
    """Random non-degenerate j-simplex inside the unit cell."""
    while True:
        x = rng.uniform(lo, hi, (j + 1, d))
        if j == 0:
            return x
        e = x[1:] - x[0]
        if np.sqrt(np.linalg.det(e @ e.T)) > 1e-2:
            return x


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
