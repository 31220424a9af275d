import numpy as np
import pytest

from platesynth import default_atlas, kernels


@pytest.fixture(scope="session")
def atlas():
    return default_atlas()


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


def pytest_report_header(config):
    return f"platesynth kernels: {kernels.available_backends()}, active {kernels.active_backend()}"
