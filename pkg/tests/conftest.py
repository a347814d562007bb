import numpy as np
import pytest

from semrdp import dsbs_model


@pytest.fixture(scope="session")
def model_q01():
    return dsbs_model(0.1, 0.2)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=np.uint64(20250808)))
