import warnings

import numpy as np
import pytest

from hirota.errors import TruncationWarning
from hirota.potential import Potential

ACCEPTANCE_LINES = []


def record(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_truncation():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


def sech_potential(amp=0.3, half=40.0, n=3201):
    return Potential.from_function(lambda x: amp / np.cosh(x), -half, half, n, tail_policy="ignore")
