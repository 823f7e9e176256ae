import numpy as np
import pytest

from cfgen.numkit import RngStream


@pytest.fixture
def stream(request):
    # one independent stream per test, keyed by the test name
    return RngStream(20240601).split(request.node.name)


def rel_err(a, b, floor=1e-12):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
