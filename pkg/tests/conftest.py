"""
Fixtures compartidas de los tests del simulador SM-NOMA.
"""

import numpy as np
import pytest

from smnoma.models.channel import ChannelRealization
from smnoma.models.system_config import SystemConfig, default_paper_config
from smnoma.utils.rng_utils import RngKey, complex_normal


def make_config(**overrides) -> SystemConfig:
    """Escenario pequeño: Nt=4, Nr=2, K=2, QPSK, usuarios a 0.15/0.1 km."""
    base = dict(
        n_tx                 = 4,
        n_rx                 = 2,
        n_pairs              = 2,
        qam_order            = 4,
        bandwidth_hz         = 4.32e6,
        noise_density_dbm_hz = -169.0,
        distances_km         = (0.15, 0.1, 0.15, 0.1),
        snr_grid_db          = (0.0, 10.0, 20.0),
        n_trials             = 8,
        seed                 = 2017,
        n_noise_samples      = 64,
    )
    base.update(overrides)
    return SystemConfig(**base)


def random_realization(seed: int, n_users: int, n_rx: int, n_tx: int) -> ChannelRealization:
    rng = RngKey.root(seed).generator()
    return ChannelRealization(per_user=tuple(complex_normal(rng, (n_rx, n_tx)) for _ in range(n_users)),
                              trial_index=0)


@pytest.fixture
def small_cfg():
    return make_config()


@pytest.fixture
def single_pair_cfg():
    """K=1, Nt=2, Nr=2, QPSK: sin interferencia entre grupos."""
    return make_config(n_tx=2, n_pairs=1, distances_km=(0.15, 0.1))


@pytest.fixture
def paper_cfg():
    return default_paper_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
