"""
Tests del modelo de canal y del presupuesto de enlace.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from smnoma.exceptions import ChannelDomainError
from smnoma.models.system_config import SnrReference
from smnoma.services.channel_service import (
    gen_channel,
    link_budget,
    noise_power_dbm,
    path_gains,
    pathloss_db,
    tx_power_dbm,
)
from smnoma.utils.db_utils import db_to_linear, dbm_to_mw, linear_to_db, mw_to_dbm

from tests.conftest import make_config


class TestPathloss:
    def test_one_kilometre(self):
        """A 1 km la pérdida es la ordenada al origen."""
        assert pathloss_db(1.0) == 128.1

    def test_slope_per_decade(self):
        assert_allclose(pathloss_db(0.1), 128.1 - 37.6)

    @pytest.mark.parametrize("distance", [0.0, -0.5])
    def test_non_positive_distance(self, distance):
        with pytest.raises(ChannelDomainError):
            pathloss_db(distance)

    def test_nearer_user_has_larger_gain(self, small_cfg):
        gains = path_gains(small_cfg)
        assert gains[1] > gains[0]


class TestLinkBudget:
    def test_noise_power(self, paper_cfg):
        assert_allclose(noise_power_dbm(paper_cfg), -169.0 + 10 * math.log10(4.32e6))

    def test_receive_reference(self, small_cfg):
        """Con referencia de recepción la SNR media a la distancia de referencia es el eje."""
        p_dbm = tx_power_dbm(small_cfg, 20.0)
        received = p_dbm - pathloss_db(small_cfg.reference_distance_km) - noise_power_dbm(small_cfg)
        assert_allclose(received, 20.0)

    def test_transmit_reference(self):
        cfg = make_config(snr_reference=SnrReference.TRANSMIT)
        assert_allclose(tx_power_dbm(cfg, 20.0) - noise_power_dbm(cfg), 20.0)

    def test_budget_fields(self, small_cfg):
        budget = link_budget(small_cfg, 10.0)
        assert len(budget.pathloss_db) == small_cfg.n_users
        assert budget.tx_power_dbm == tx_power_dbm(small_cfg, 10.0)

    def test_db_conversions(self):
        assert_allclose(linear_to_db(db_to_linear(13.0)), 13.0)
        assert_allclose(mw_to_dbm(dbm_to_mw(-90.0)), -90.0)
        assert_allclose(dbm_to_mw(30.0), 1000.0)


class TestGenChannel:
    def test_shapes(self, small_cfg):
        channels = gen_channel(small_cfg, 0)
        assert channels.n_users == small_cfg.n_users
        assert all(h.shape == (small_cfg.n_rx, small_cfg.n_tx) for h in channels.per_user)

    def test_deterministic_per_trial(self, small_cfg):
        """La realización depende sólo de (seed, trial, usuario), no del orden de llamada."""
        later = gen_channel(small_cfg, 5)
        gen_channel(small_cfg, 0)
        again = gen_channel(small_cfg, 5)
        for a, b in zip(later.per_user, again.per_user):
            assert_array_equal(a, b)

    def test_trials_and_seeds_differ(self, small_cfg):
        a = gen_channel(small_cfg, 0).per_user[0]
        b = gen_channel(small_cfg, 1).per_user[0]
        c = gen_channel(small_cfg.with_overrides(seed=7), 0).per_user[0]
        assert not np.allclose(a, b)
        assert not np.allclose(a, c)

    def test_same_fading_draw_scaled_by_pathloss(self):
        """El canal de cada usuario es sqrt(ganancia) por su desvanecimiento."""
        near = make_config(distances_km=(0.1, 0.1, 0.1, 0.1))
        far = make_config(distances_km=(0.2, 0.2, 0.2, 0.2))
        ratio = gen_channel(near, 3).per_user[2] / gen_channel(far, 3).per_user[2]
        expected = math.sqrt(db_to_linear(pathloss_db(0.2) - pathloss_db(0.1)))
        assert_allclose(ratio, expected)

    def test_average_power_matches_path_gain(self):
        cfg = make_config(n_rx=8, n_tx=8, distances_km=(0.15,) * 4)
        powers = [np.mean(np.abs(gen_channel(cfg, t).per_user[0]) ** 2) for t in range(200)]
        assert_allclose(np.mean(powers), path_gains(cfg)[0], rtol=0.05)

    def test_negative_trial(self, small_cfg):
        with pytest.raises(ChannelDomainError):
            gen_channel(small_cfg, -1)
