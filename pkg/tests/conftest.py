import numpy as np
import pytest
from hypothesis import settings

from jmixer.coupled import jm3_netlist, jm4_netlist
from jmixer.jrm import JRMParams
from jmixer.resonant import ResonantJMParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def jrm12():
    return JRMParams(I0=8.1e-6, L_s=10e-12, L_in=11.3e-12, L_out=27e-12)


@pytest.fixture
def jrm34():
    return JRMParams(I0=2.5e-6, L_s=10e-12, L_in=30e-12, L_out=9e-12)


@pytest.fixture
def jm1(jrm12):
    return ResonantJMParams(jrm12, C_a=6.1e-12, C_b=3.13e-12)


@pytest.fixture
def jm2(jrm12):
    return ResonantJMParams(jrm12, C_a=5.85e-12, C_b=3.13e-12)


@pytest.fixture
def jm3():
    return jm3_netlist()


@pytest.fixture
def jm4():
    return jm4_netlist()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary prints them in order."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
