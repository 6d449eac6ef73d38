"""
Tests del estimador de información mutua y de las tasas ergódicas SM.
"""

import logging
import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from smnoma.exceptions import InvalidConfigError
from smnoma.models.channel import ChannelRealization
from smnoma.models.grouping import UserPair
from smnoma.models.results import Scheme
from smnoma.models.system_config import InterferenceModel, RateSplit
from smnoma.services.channel_service import gen_channel, noise_power_mw, tx_power_mw
from smnoma.services.modem_service import make_constellation
from smnoma.services.oracle_service import quadrature_mi
from smnoma.services.pairing_service import fixed_partition, pair_users
from smnoma.services.rate_service import (
    INDEX_ROLE,
    SYMBOL_ROLE,
    ergodic_rates,
    mi_index_user,
    mi_joint,
    mi_symbol_user,
    resolve_interference_model,
    sm_pair_rate,
    sm_trial_rates,
    snr_index_of,
    summarize_trials,
)
from smnoma.utils.rng_utils import RngKey, complex_normal

from tests.conftest import make_config


KEY = RngKey.root(99)


class TestMutualInformation:
    def test_vanishing_snr(self, rng):
        columns = 1e-8 * complex_normal(rng, (2, 4))
        constellation = make_constellation(4)
        assert mi_index_user(columns, constellation, 1.0, 2000, KEY).value < 0.01
        assert mi_symbol_user(columns, constellation, 1.0, 2000, KEY).value < 0.01

    def test_noiseless_caps(self, rng):
        """Sin ruido efectivo se alcanzan log2 L, log2 M y log2(L M)."""
        columns = complex_normal(rng, (4, 2))
        constellation = make_constellation(4)
        assert mi_index_user(columns, constellation, 1e-8, 500, KEY).value == pytest.approx(1.0, abs=1e-3)
        assert mi_symbol_user(columns, constellation, 1e-8, 500, KEY).value == pytest.approx(2.0, abs=1e-3)
        assert mi_joint(columns, constellation, 1e-8, 500, KEY).value == pytest.approx(3.0, abs=1e-3)

    @pytest.mark.parametrize("noise", [0.1, 1.0, 10.0])
    def test_values_within_alphabet_bounds(self, rng, noise):
        columns = complex_normal(rng, (2, 4))
        constellation = make_constellation(16)
        index = mi_index_user(columns, constellation, noise, 1000, KEY)
        symbol = mi_symbol_user(columns, constellation, noise, 1000, KEY)
        assert -3 * index.std_error <= index.value <= 2.0 + 1e-12
        assert -3 * symbol.std_error <= symbol.value <= 4.0 + 1e-12
        assert index.n_noise_samples == 1000

    def test_estimate_is_not_clipped_at_zero(self, rng):
        """A SNR nula las estimaciones independientes se reparten a ambos lados de cero."""
        columns = 1e-3 * complex_normal(rng, (2, 4))
        constellation = make_constellation(4)
        values = [mi_index_user(columns, constellation, 1.0, 50, KEY.child(k)).value for k in range(40)]
        assert min(values) < 0.0
        assert abs(np.mean(values)) < 1e-3

    @pytest.mark.parametrize("target", ['index', 'symbol'])
    def test_matches_quadrature(self, target):
        channel = [1.0 + 0.2j, -0.4 + 0.7j]
        constellation = make_constellation(2)
        columns = np.array([channel])
        estimator = mi_index_user if target == 'index' else mi_symbol_user
        estimate = estimator(columns, constellation, 0.5, 20000, KEY).value
        assert estimate == pytest.approx(quadrature_mi(channel, constellation, 0.5, target), abs=0.03)

    def test_chain_rule_on_shared_samples(self, rng):
        """I(A,X;Y) = I(A;Y) + I(X;Y|A) con las mismas muestras."""
        columns = complex_normal(rng, (2, 2))
        constellation = make_constellation(4)
        joint = mi_joint(columns, constellation, 0.3, 3000, KEY).value
        index = mi_index_user(columns, constellation, 0.3, 3000, KEY).value
        given = mi_symbol_user(columns, constellation, 0.3, 3000, KEY, given_index=True).value
        assert joint == pytest.approx(index + given, rel=1e-9)

    def test_standard_error_shrinks_with_samples(self, rng):
        columns = complex_normal(rng, (2, 2))
        constellation = make_constellation(4)
        small = mi_index_user(columns, constellation, 1.0, 1000, KEY).std_error
        large = mi_index_user(columns, constellation, 1.0, 4000, KEY).std_error
        assert 0.35 < large / small < 0.65

    def test_same_key_same_estimate(self, rng):
        columns = complex_normal(rng, (2, 2))
        constellation = make_constellation(4)
        a = mi_index_user(columns, constellation, 1.0, 500, KEY)
        b = mi_index_user(columns, constellation, 1.0, 500, KEY)
        assert a == b

    def test_invalid_arguments(self, rng):
        columns = complex_normal(rng, (2, 2))
        constellation = make_constellation(4)
        with pytest.raises(InvalidConfigError):
            mi_index_user(columns, constellation, 0.0, 100, KEY)
        with pytest.raises(InvalidConfigError):
            mi_symbol_user(columns, constellation, 1.0, 0, KEY)


class TestPairRates:
    def test_single_pair_matches_direct_estimate(self, single_pair_cfg):
        """Con K = 1 la tasa del par es la MI de las columnas escaladas por sqrt(P/N)."""
        channels = gen_channel(single_pair_cfg, 0)
        pair = pair_users(channels)[0]
        partition = fixed_partition(2, 1)
        key = RngKey.root(5)
        index_rate, symbol_rate = sm_pair_rate(channels, pair, partition, single_pair_cfg,
                                               snr_db=10.0, rng_key=key)

        scale = math.sqrt(tx_power_mw(single_pair_cfg, 10.0) / noise_power_mw(single_pair_cfg))
        constellation = make_constellation(single_pair_cfg.qam_order)
        n_samples = single_pair_cfg.n_noise_samples
        expected_index = mi_index_user(channels.per_user[pair.index_user] * scale, constellation, 1.0,
                                       n_samples, key.child(INDEX_ROLE)).value
        expected_symbol = mi_symbol_user(channels.per_user[pair.symbol_user] * scale, constellation, 1.0,
                                         n_samples, key.child(SYMBOL_ROLE)).value
        assert index_rate == pytest.approx(expected_index, rel=1e-7, abs=1e-12)
        assert symbol_rate == pytest.approx(expected_symbol, rel=1e-7, abs=1e-12)

    def test_zero_cross_gains_make_whitening_trivial(self):
        """Si los otros grupos no llegan al usuario, WHITENED coincide con CANCELLED."""
        rng = np.random.default_rng(7)
        per_user = []
        for _ in range(4):
            h = complex_normal(rng, (2, 4))
            h[:, [1, 3]] = 0.0
            per_user.append(h)
        channels = ChannelRealization(per_user=tuple(per_user), trial_index=0)
        pair = UserPair(index_user=0, symbol_user=1, similarity=0.5)
        partition = fixed_partition(4, 2)

        whitened = make_config(interference_model=InterferenceModel.WHITENED)
        cancelled = make_config(interference_model=InterferenceModel.CANCELLED)
        a = sm_pair_rate(channels, pair, partition, whitened, group=0, snr_db=10.0, rng_key=KEY)
        b = sm_pair_rate(channels, pair, partition, cancelled, group=0, snr_db=10.0, rng_key=KEY)
        assert a == pytest.approx(b, rel=1e-7, abs=1e-12)

    def test_chain_split_changes_symbol_rate_only(self, small_cfg):
        channels = gen_channel(small_cfg, 0)
        pair = pair_users(channels)[0]
        partition = fixed_partition(4, 2)
        marginal = sm_pair_rate(channels, pair, partition, small_cfg, rng_key=KEY)
        chain = sm_pair_rate(channels, pair, partition, small_cfg.with_overrides(rate_split=RateSplit.CHAIN),
                             rng_key=KEY)
        assert chain[0] == marginal[0]

    def test_cancelled_interference_is_an_upper_bound(self, small_cfg):
        whitened = small_cfg.with_overrides(n_noise_samples=1000)
        cancelled = whitened.with_overrides(interference_model=InterferenceModel.CANCELLED)
        totals = [sum(sum(sm_trial_rates(cfg, t, 2)) for t in range(10)) for cfg in (whitened, cancelled)]
        assert totals[0] <= totals[1] + 0.5


class TestTrialRates:
    def test_shape_and_bounds(self, small_cfg):
        rates = sm_trial_rates(small_cfg, 0, 2)
        assert rates.shape == (4,)
        # estimación sin recortar: puede quedar apenas bajo cero
        assert np.all(rates >= -0.1)
        pairs = pair_users(gen_channel(small_cfg, 0))
        for pair in pairs:
            assert rates[pair.index_user] <= 1.0 + 1e-12
            assert rates[pair.symbol_user] <= 2.0 + 1e-12

    @pytest.mark.parametrize("trial", range(4))
    def test_rates_grow_along_snr_grid(self, trial):
        """Sin interferencia entre grupos la tasa del par no decrece a lo largo de la grilla."""
        cfg = make_config(n_pairs=1, distances_km=(0.15, 0.1), snr_grid_db=(-10.0, 0.0, 10.0, 20.0, 30.0),
                          n_noise_samples=1000)
        pairs = pair_users(gen_channel(cfg, trial))
        per_snr = [sm_trial_rates(cfg, trial, s) for s in range(len(cfg.snr_grid_db))]
        for lower, higher in zip(per_snr, per_snr[1:]):
            for pair in pairs:
                users = list(pair.users)
                assert higher[users].sum() >= lower[users].sum() - 0.1

    def test_deterministic(self, small_cfg):
        assert_array_equal(sm_trial_rates(small_cfg, 3, 1), sm_trial_rates(small_cfg, 3, 1))
        assert not np.array_equal(sm_trial_rates(small_cfg, 3, 1), sm_trial_rates(small_cfg, 4, 1))


class TestErgodicRates:
    def test_summarize_trials(self):
        per_user, mean_sum, mean_worst, sum_se = summarize_trials(np.array([[1.0, 2.0], [3.0, 0.0]]))
        assert per_user == (2.0, 1.0)
        assert mean_sum == 3.0
        assert mean_worst == 0.5
        assert sum_se == 0.0

    def test_single_trial_has_no_standard_error(self, small_cfg):
        row = ergodic_rates(small_cfg.with_overrides(n_trials=1), 10.0)
        assert row.scheme == Scheme.SMN
        assert row.n_trials == 1
        assert math.isnan(row.sum_rate_se)
        assert row.index_ber is None and row.symbol_ber is None
        assert row.sum_rate == pytest.approx(sum(row.per_user_rates))
        assert row.worst_rate == min(row.per_user_rates)

    def test_worst_rate_is_mean_of_minimum(self, small_cfg):
        cfg = small_cfg.with_overrides(n_trials=4)
        row = ergodic_rates(cfg, 20.0)
        per_trial = np.array([sm_trial_rates(cfg, t, 2) for t in range(4)])
        assert row.worst_rate == pytest.approx(np.mean(per_trial.min(axis=1)))
        assert row.worst_rate <= min(row.per_user_rates) + 1e-12

    def test_snr_outside_grid(self, small_cfg):
        with pytest.raises(InvalidConfigError):
            ergodic_rates(small_cfg, 5.0)
        assert snr_index_of(small_cfg, 20) == 2


class TestInterferenceModel:
    def test_exact_falls_back_when_alphabet_too_large(self, caplog):
        cfg = make_config(qam_order=16, interference_model=InterferenceModel.EXACT)
        with caplog.at_level(logging.WARNING, logger='smnoma.services.rate_service'):
            assert resolve_interference_model(cfg, warn=True) == InterferenceModel.WHITENED
        assert any(record.levelno == logging.WARNING for record in caplog.records)

    def test_exact_kept_for_small_alphabet(self):
        cfg = make_config(qam_order=4, interference_model=InterferenceModel.EXACT)
        assert resolve_interference_model(cfg) == InterferenceModel.EXACT

    def test_exact_falls_back_for_many_pairs(self):
        cfg = make_config(n_tx=4, n_pairs=4, qam_order=2, distances_km=(0.1,) * 8,
                          interference_model=InterferenceModel.EXACT)
        assert resolve_interference_model(cfg) == InterferenceModel.WHITENED
