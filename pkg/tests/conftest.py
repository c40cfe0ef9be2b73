import pytest

from tbplankton.model import ModelParams, State


@pytest.fixture
def baseline():
    return ModelParams(alpha=1.9, lam=0.057, beta=1.3, gamma=0.5, mu=0.0)


@pytest.fixture
def start():
    return State(0.9, 0.5)
