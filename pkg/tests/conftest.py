import numpy as np
import pytest

from teichkit.surface import standard_graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def torus():
    """Standard once-punctured torus graph: two vertices, three edges."""
    return standard_graph(1, 1)


@pytest.fixture
def sphere4():
    return standard_graph(0, 4)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for cid in sorted(results):
            terminalreporter.write_line(results[cid])
