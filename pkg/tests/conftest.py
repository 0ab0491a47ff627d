import sys

import numpy as np
import pytest

from cohconv import Ensemble, PureState
from cohconv.kernels import backends


def sqrt_state(*probs, phases=None):
    """Pure state with the given profile and optional per-entry phases (radians)."""
    amp = np.sqrt(np.array(probs, dtype=float)).astype(complex)
    if phases is not None:
        amp = amp * np.exp(1j * np.asarray(phases))
    return PureState(amp)


def ens(*pairs):
    """ens((w, state), ...)"""
    return Ensemble([w for w, _ in pairs], tuple(s for _, s in pairs))


def uniform(d):
    return PureState(np.ones(d) / np.sqrt(d))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(backends()))
def kernel_module(request):
    return backends()[request.param]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
