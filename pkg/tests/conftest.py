import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")

from normsol import RadialGrid, minimize_local, minimize_on_Mminus, two_power_model
from normsol.thresholds import geometry_report

_OUTCOMES: list = []


def record_outcome(line: str) -> None:
    _OUTCOMES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _OUTCOMES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_OUTCOMES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def model():
    return two_power_model()


@pytest.fixture(scope="session")
def rho(model):
    return 0.5 * geometry_report(model, 1.0).rho_max


@pytest.fixture(scope="session")
def geo(model, rho):
    return geometry_report(model, rho)


@pytest.fixture(scope="session")
def ground(model, rho):
    return minimize_local(model, rho, RadialGrid(N=3, r_max=40.0, n=4096))


@pytest.fixture(scope="session")
def excited(model, rho):
    # clustered grid: the core of this state is ~0.1 wide
    return minimize_on_Mminus(model, rho, RadialGrid(N=3, r_max=6.0, n=4096, stretch=8.0))


@pytest.fixture(scope="session")
def small_grid():
    return RadialGrid(N=3, r_max=20.0, n=512)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
