import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


@pytest.fixture
def weak_gap_weights():
    return (0.4, 0.3, 0.3), (0.5, 0.1, 0.4)


def uniform_weights(rng, K):
    u = rng.random(K)
    return u / u.sum()


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)
