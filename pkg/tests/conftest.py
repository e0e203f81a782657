import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rhs_spectra import BarrierConfig, QuadratureSpec

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def cfg():
    return BarrierConfig()


@pytest.fixture(scope="session")
def free():
    return BarrierConfig(v0=0.0)


@pytest.fixture(scope="session")
def quad():
    return QuadratureSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
