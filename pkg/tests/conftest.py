import sys

import numpy as np
import pytest

from lnasynth import kernels

BACKENDS = {"numpy": (kernels._scatter_stamps_numpy, kernels._solve_batch_numpy)}
if kernels._solve_batch_numba is not None:
    BACKENDS["numba"] = (kernels._scatter_stamps_numba, kernels._solve_batch_numba)
    BACKENDS["loops"] = (kernels._scatter_stamps_loops, kernels._solve_batch_loops)


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


W0 = 2 * np.pi * 2.45e9


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
