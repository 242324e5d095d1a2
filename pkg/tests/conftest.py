import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def five_sigma(p, shots):
    return 5.0 * np.sqrt(p * (1 - p) / shots)
