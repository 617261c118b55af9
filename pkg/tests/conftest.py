import numpy as np
import pytest

from covert_ris.channel import build_channel_set
from covert_ris.config import SystemConfig, desk_config


@pytest.fixture(scope="session")
def cfg_desk():
    return desk_config()


@pytest.fixture(scope="session")
def cfg_paper():
    return SystemConfig()


@pytest.fixture(scope="session")
def channels_desk(cfg_desk):
    return build_channel_set(cfg_desk, 0)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_psd(rng, n, rank=None):
    k = rank or n
    x = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    return x @ x.conj().T / n
