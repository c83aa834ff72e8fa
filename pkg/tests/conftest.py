import pytest

from src.config.schema import ProtocolConfig
from src.utils.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture
def small_config():
    return ProtocolConfig(m=3, n=2, N=50, seed=7)
