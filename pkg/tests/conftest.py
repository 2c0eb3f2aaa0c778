import numpy as np
import pytest

from circumext.spaces import DiskModel, TreeModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def disk():
    return DiskModel(1.0)


@pytest.fixture
def tree():
    return TreeModel(3, 1)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "ACCEPTANCE_LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
