import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chiralchain.chiral import ChainGeometry, ModeModel
from chiralchain.greens import NanowireSpec

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_REPORT = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_REPORT] = []


@pytest.fixture
def report(request):
    """Record one acceptance line; printed in the terminal summary."""
    lines = request.config.stash[_REPORT]

    def emit(label, ok, detail):
        lines.append((label, f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"))
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def wire():
    """Silver wire at the reference design point."""
    return NanowireSpec(rho_c=0.05, epsilon=-16 + 0.44j)


@pytest.fixture
def unit_mode():
    return ModeModel(gamma_g=1.0, gamma_r=0.0, k_g=2 * np.pi)


@pytest.fixture
def chain5():
    return ChainGeometry.regular(5, 2.0)
