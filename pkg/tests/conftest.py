import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sqht import DensityMatrix, OptimizerOptions, StatePair, qubit_family  # noqa: E402


@pytest.fixture(scope="session")
def diag_pair():
    return StatePair(DensityMatrix(np.diag([0.6, 0.4])), DensityMatrix(np.diag([0.3, 0.7])), "diag")


@pytest.fixture(scope="session")
def qubit_pair():
    return qubit_family(0.98, 0.98, 1.57)


@pytest.fixture(scope="session")
def fast_opts():
    return OptimizerOptions(restarts=6, seed=0)


# acceptance report ---------------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
