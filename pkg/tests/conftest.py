import numpy as np
import pytest

from prodnet.core import Economy
from prodnet.experiments import diagonal_pair_economies


@pytest.fixture(scope="session")
def econ_pair():
    """The canonical 2-industry pair: uncoupled (a) and coupled (b)."""
    return diagonal_pair_economies()


@pytest.fixture(scope="session")
def econ_a(econ_pair):
    return econ_pair[0]


@pytest.fixture(scope="session")
def econ_b(econ_pair):
    return econ_pair[1]


@pytest.fixture
def tiny_economy():
    """Single industry, no intermediates."""
    return Economy(
        A=np.zeros((1, 1)),
        labor_shares=np.ones(1),
        consumption_shares=np.ones(1),
    )
