import pytest

from vascnet.grid import HalfLineGrid
from vascnet.model import BoundaryData, ModelParams, Quadratic
from vascnet.steady import StationaryFunctions, compute_steady_profile

# acceptance tests append (criterion, passed, detail) here; printed at the end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def params():
    return ModelParams(mu=1.0, alpha=1.0, a=1.0, b=1.0)


@pytest.fixture(scope="session")
def law():
    return Quadratic(2.0)


@pytest.fixture(scope="session")
def bdry(params):
    return BoundaryData.from_params(params, 1.0, 1.2)


@pytest.fixture(scope="session")
def fns(law, params, bdry):
    return StationaryFunctions(law, params, bdry)


@pytest.fixture(scope="session")
def small_grid():
    return HalfLineGrid(40.0, 400)


@pytest.fixture(scope="session")
def small_profile(fns, small_grid):
    return compute_steady_profile(fns, small_grid)
