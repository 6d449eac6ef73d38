"""
Tests de las suites de validación contra oráculos, a tamaño reducido.
"""

import pytest

from smnoma.services.oracle_service import (
    SUITES,
    SuiteResult,
    naive_ber,
    run_validation,
    suite_ber,
    suite_allocation,
    suite_mi_quadrature,
    suite_ml_detector,
    suite_modem_round_trip,
    suite_mrc_detector,
    suite_pairing,
    suite_sic_rates,
    suite_zf_beams,
)
from smnoma.utils.rng_utils import ORACLE_STREAM, RngKey

KEY = RngKey.root(0).child(ORACLE_STREAM)


class TestSuites:
    @pytest.mark.parametrize("suite, kwargs", [
        (suite_ml_detector, dict(n_instances=500)),
        (suite_mrc_detector, dict(n_instances=500)),
        (suite_zf_beams, dict(n_instances=100)),
        (suite_sic_rates, dict(n_draws=5000)),
        (suite_allocation, dict(n_instances=10)),
        (suite_pairing, dict(n_instances=200)),
    ])
    def test_suite_passes(self, suite, kwargs):
        result = suite(KEY, **kwargs)
        assert result.passed, str(result)

    def test_mi_quadrature(self):
        result = suite_mi_quadrature(KEY, n_samples=20000, tolerance=0.03)
        assert result.passed, str(result)

    def test_modem_round_trip(self):
        result = suite_modem_round_trip(max_load=256)
        assert result.passed, str(result)

    def test_end_to_end_ber(self):
        """L = 2, BPSK, Nr en {1, 2}: run_ber coincide en distribución con el bucle ingenuo."""
        result = suite_ber(KEY, n_uses=1500)
        assert result.passed, str(result)

    def test_naive_ber_rejects_larger_scenarios(self, small_cfg, rng):
        with pytest.raises(ValueError):
            naive_ber(small_cfg, 10.0, 10, rng)


class TestRunValidation:
    def test_only_selects_suites(self):
        results = run_validation(seed=3, only=['modem'])
        assert [r.name for r in results] == [suite_modem_round_trip().name]
        assert results[0].passed

    def test_registry_names(self):
        assert set(SUITES) == {'ml_detect', 'mrc_detect', 'zf_beams', 'mi', 'sic_rates',
                               'modem', 'allocation', 'pairing', 'ber'}

    def test_result_text(self):
        assert str(SuiteResult("x", True, "ok")).startswith("PASS")
        assert str(SuiteResult("x", False, "mal")).startswith("FAIL")
