import numpy as np
import pytest

from peierls import Box, Configuration, potts_model


@pytest.fixture
def ising():
    return potts_model(d=2, r=1, q=2, J=1.0)


@pytest.fixture
def potts3():
    return potts_model(d=2, r=1, q=3, J=1.0)


def random_configs(box, q, count, seed, exterior=1):
    rng = np.random.default_rng(seed)
    return [Configuration.random(box, q, exterior, rng) for _ in range(count)]


def single_flip(box, site, mark=2, exterior=1):
    return Configuration.constant(box, exterior).replace({site: mark})
