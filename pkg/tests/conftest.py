import numpy as np
import pytest
from hypothesis import settings

from metasurf.lattice import GratingConfig
from metasurf.pipeline import solve
from metasurf.scatter import dipole, monopole

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def dipole_solution():
    cfg = GratingConfig(k0=2.0, theta=0.2)
    return solve(cfg, dipole(0.7, 2.1))


@pytest.fixture(scope="session")
def monopole_solution():
    cfg = GratingConfig(k0=2.0, theta=0.2)
    return solve(cfg, monopole(1.1, 1))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
