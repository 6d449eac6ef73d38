"""
Verificaciones de aceptación a escala de escritorio.

Son lentas (10 000 realizaciones con M = 64) y quedan fuera de la corrida
por defecto; ejecutar con ``pytest -m slow``.
"""

import math
import os
import time

import pytest

from smnoma.models.results import Scheme
from smnoma.models.system_config import InterferenceModel, default_paper_config
from smnoma.services.rate_service import sm_trial_rates
from smnoma.services.sweep_service import run_ber, run_sweep, variant_config

from tests.conftest import make_config

pytestmark = pytest.mark.slow

DESK_TRIALS = 10_000
WORKERS = os.cpu_count() or 1

# Tramo donde ambas curvas crecen lejos de sus topes (eje referido a la recepción a 0.15 km)
ORDERING_BAND_DB = (-15.0, -10.0, -5.0)


def _paper_variant(n_pairs: int, **overrides):
    base = default_paper_config().with_overrides(**overrides)
    return variant_config(base, {'n_pairs': n_pairs})


class TestSaturationCaps:
    @pytest.mark.parametrize("n_pairs, cap", [(2, 2.0), (4, 1.0)])
    def test_worst_user_reaches_index_cap(self, n_pairs, cap):
        """Con Nt = 8 el peor usuario satura en log2(Nt / K)."""
        cfg = _paper_variant(n_pairs, n_trials=DESK_TRIALS, snr_grid_db=(40.0, 50.0, 60.0))
        result = run_sweep(cfg, [Scheme.SMN], workers=WORKERS)
        for snr_db in cfg.snr_grid_db:
            assert result.row(Scheme.SMN, snr_db).worst_rate == pytest.approx(cap, abs=0.05)


class TestSumRateOrdering:
    @pytest.mark.parametrize("n_pairs, smn_wins", [(4, True), (2, False)])
    def test_ordering_over_three_consecutive_points(self, n_pairs, smn_wins):
        """Nu = 8: SMN sobre CMN; Nu = 4: CMN sobre SMN, por al menos 3 errores estándar combinados."""
        cfg = _paper_variant(n_pairs, n_trials=DESK_TRIALS, snr_grid_db=ORDERING_BAND_DB)
        result = run_sweep(cfg, workers=WORKERS)
        for snr_db in cfg.snr_grid_db:
            smn, cmn = result.row(Scheme.SMN, snr_db), result.row(Scheme.CMN, snr_db)
            margin = 3.0 * math.hypot(smn.sum_rate_se, cmn.sum_rate_se)
            if smn_wins:
                assert smn.sum_rate - cmn.sum_rate > margin
            else:
                assert cmn.sum_rate - smn.sum_rate > margin


class TestGaussianInterference:
    def test_gaussian_rate_not_above_exact_alphabet(self):
        """K = 2, L = 2, BPSK: la aproximación gaussiana no supera la MI con el alfabeto exacto."""
        whitened = make_config(qam_order=2, n_noise_samples=5000)
        exact = whitened.with_overrides(interference_model=InterferenceModel.EXACT)
        for trial in range(20):
            gaussian = sum(sm_trial_rates(whitened, trial, 1))
            enumerated = sum(sm_trial_rates(exact, trial, 1))
            assert gaussian <= enumerated + 0.05


class TestBerCurve:
    def test_monotone_over_six_points(self):
        cfg = make_config(n_tx=2, n_pairs=1, distances_km=(0.15, 0.1), mrc_normalized=True)
        n_bits = 30_000
        curve = [run_ber(cfg, snr, n_bits) for snr in (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0)]
        n_uses = n_bits // 3
        for (i0, s0), (i1, s1) in zip(curve, curve[1:]):
            index_bound = 1.96 * math.sqrt(max(i0 * (1 - i0), 1e-4) / n_uses)
            symbol_bound = 1.96 * math.sqrt(max(s0 * (1 - s0), 1e-4) / (2 * n_uses))
            assert i1 <= i0 + index_bound
            assert s1 <= s0 + symbol_bound

    def test_paper_scenario_noiseless_is_error_free(self):
        cfg = default_paper_config()
        load = cfg.n_pairs * (cfg.index_bits + cfg.symbol_bits)
        assert run_ber(cfg, 20.0, 200 * load, noiseless=True) == (0.0, 0.0)


class TestRuntimeBudget:
    def test_desk_sweep_projects_under_ten_minutes_on_eight_cores(self):
        """10 000 realizaciones x 8 puntos x ambos esquemas, proyectado desde una muestra serie."""
        cfg = _paper_variant(4, n_trials=80)
        assert len(cfg.snr_grid_db) == 8

        start = time.perf_counter()
        run_sweep(cfg, workers=1, chunk_size=cfg.n_trials)
        elapsed = time.perf_counter() - start

        projected = elapsed / cfg.n_trials * DESK_TRIALS / 8
        assert projected < 600.0, f"proyección {projected:.0f} s"
