import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from semiclassica.grid import GridSpec, default_grid
from semiclassica.phase_space import builtin_potential

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def grid1():
    return default_grid(1)


@pytest.fixture(scope="session")
def small_grid1():
    return GridSpec(1, 6.0, 256)


@pytest.fixture(scope="session")
def grid2():
    return default_grid(2)


@pytest.fixture(scope="session")
def doublewell():
    return builtin_potential("doublewell")


@pytest.fixture(scope="session")
def harmonic():
    return builtin_potential("harmonic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, echoed in the terminal summary so they survive output capture
_VERDICTS = []


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        line = f"CRITERION {number:2d} {'PASS' if ok else 'FAIL'}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
