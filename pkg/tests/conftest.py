import numpy as np
import pytest

from mleqc.core import EncodedSpace
from mleqc.dynamics import na2_model
from mleqc.encoding import ea_operators


@pytest.fixture(scope="session")
def system():
    return na2_model()


@pytest.fixture(scope="session")
def qubit_space():
    return EncodedSpace(1, 2)


@pytest.fixture(scope="session")
def qubit_ops(qubit_space):
    return ea_operators(qubit_space)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
