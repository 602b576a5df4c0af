import numpy as np
import pytest

import config
from privacy.noise import RngStream, noise_disabled


@pytest.fixture(autouse=True)
def enable_test_hooks(monkeypatch):
    monkeypatch.setattr(config, "ENABLE_TEST_HOOKS", True)


@pytest.fixture
def noiseless():
    with noise_disabled():
        yield


@pytest.fixture
def stream():
    return RngStream(seed=20240601)


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)
