import sys

import numpy as np
import pytest

from aapass.compiler import CompilerConfig
from aapass.model import ModelParams

SWEEP_RATES = (0.6, 1.0, 1.6, 2.0, 3.0, 4.0)
OMEGA_CAP = 2 * np.pi * 0.2e6


@pytest.fixture
def cfg():
    return CompilerConfig(omega_cap=OMEGA_CAP, n_segments=56, time_resolution=0.25e-9)


@pytest.fixture
def fig1():
    """Reference scan: delta=0.2, b=2."""
    return ModelParams(delta=0.2, b=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20121014)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
