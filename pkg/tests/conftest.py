import numpy as np
import pytest

from psicontour.geometry import DeformationParams


@pytest.fixture
def params1():
    return DeformationParams(r=1.0, r_prime=0.6, r_dprime=0.8, delta=0.1, delta_prime=0.09,
                             epsilon=0.5, R=2.0, dimension=1)


@pytest.fixture
def params2():
    return DeformationParams(r=1.0, r_prime=0.6, r_dprime=0.8, delta=0.1, delta_prime=0.09,
                             epsilon=0.5, R=2.0, dimension=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
