import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gpgw.core import GpgwParams
from gpgw.datasets import DEVICE_FAILURES, LEUKAEMIA_SURVIVAL

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


@pytest.fixture(scope="session")
def devices():
    return DEVICE_FAILURES


@pytest.fixture(scope="session")
def leukaemia():
    return LEUKAEMIA_SURVIVAL


@pytest.fixture
def unit_exp():
    return GpgwParams(1.0, 1.0, 1.0, 1.0)


def log_uniform_params(rng, n, lo=0.2, hi=5.0):
    """``n`` parameter vectors with each component log-uniform on [lo, hi]."""
    draws = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, 4)))
    return [GpgwParams(*row) for row in draws]


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance verdicts, one line per criterion, after the run."""
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        terminalreporter.write_line(lines[key])
