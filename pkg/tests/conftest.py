import math

import pytest
from hypothesis import HealthCheck, settings

from orlicz_spectra.discretization import Grid
from orlicz_spectra.orlicz_core import (
    ExponentField,
    PowerLog,
    PowerOverLog,
    PurePower,
    YoungFunction,
)
from orlicz_spectra.solver import EnergyContext

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def yf_square():
    return YoungFunction(PurePower(2.0))


@pytest.fixture(scope="session")
def yf_ex1():
    return YoungFunction(PowerLog(2.5, 1.5))


@pytest.fixture(scope="session")
def yf_ex2():
    return YoungFunction(PowerOverLog(4.0))


@pytest.fixture(scope="session")
def grid256():
    return Grid((1.0,), (256,))


@pytest.fixture(scope="session")
def ctx_ex1(grid256, yf_ex1):
    q = ExponentField(grid256, 1.5 + 0.4 * grid256.node_coords[0])
    return EnergyContext.build(yf_ex1, q)


@pytest.fixture(scope="session")
def ctx_ex2(grid256, yf_ex2):
    return EnergyContext.build(yf_ex2, ExponentField(grid256, 2.0))


@pytest.fixture(scope="session")
def ctx_hom(grid256, yf_square):
    return EnergyContext.build(yf_square, ExponentField(grid256, 2.0))


def discrete_principal_eigenvalue(n_cells: int, length: float = 1.0) -> float:
    """Smallest eigenvalue of the 1D scheme with averaged mass: (4/h^2) tan^2(pi h / 2L)."""
    h = length / n_cells
    return 4.0 / h**2 * math.tan(math.pi * h / (2 * length)) ** 2


def random_field(grid, rng, scale=1.0):
    from orlicz_spectra.discretization import ScalarField
    vals = scale * rng.normal(size=grid.nodes_shape)
    vals[grid.boundary_mask] = 0.0
    return ScalarField(grid, vals)
