import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_disk(rng, n, rho_max=0.95):
    return rho_max * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
