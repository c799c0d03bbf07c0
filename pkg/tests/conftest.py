import numpy as np
import pytest

from pencilrep.corpus import ExampleSpec, example_model, jordan_model


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def example2_model():
    return example_model(ExampleSpec(2, 16))


@pytest.fixture(scope="session")
def example3_model():
    return example_model(ExampleSpec(3, 16))


@pytest.fixture(scope="session")
def jordan():
    return jordan_model()


def random_complex(rng, m, n, rank=None):
    """Complex Gaussian ``m x n`` matrix, optionally of a prescribed rank."""
    if rank is None:
        return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return random_complex(rng, m, rank) @ random_complex(rng, rank, n)
