import numpy as np
import pytest

J_VALUES = ("1/2", "1", "3/2", "2", "5", "10", "25")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, count=None):
    v = rng.standard_normal((count or 1, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[0] if count is None else v


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
