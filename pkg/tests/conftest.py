import numpy as np
import pytest

from thinfilm.grid import GridSpec
from thinfilm.spectral import build_workspace


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid16():
    return GridSpec(16)


@pytest.fixture
def ws16(grid16):
    return build_workspace(grid16)



def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
