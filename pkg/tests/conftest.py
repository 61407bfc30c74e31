import numpy as np
import pytest

from gssdc.graphcore import build_knn_sensor_graph, laplacian, spectral_decomposition

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_basis():
    g = build_knn_sensor_graph(24, 5, seed=3)
    return spectral_decomposition(laplacian(g))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
