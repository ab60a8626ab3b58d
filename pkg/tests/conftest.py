import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mfcorr import _accel  # noqa: E402
from mfcorr.sieve import build_sieve  # noqa: E402


@pytest.fixture(scope="session")
def sieve():
    return build_sieve(2 * 10**5)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    with _accel.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
