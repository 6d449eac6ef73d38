"""
Tests del barrido Monte Carlo, la BER y la persistencia CSV / JSON.
"""

import json
import math
from datetime import datetime, timedelta

import pytest

from smnoma.exceptions import BitLengthError, OutputError
from smnoma.models.results import Scheme, SweepResult, SweepRow
from smnoma.models.system_config import InterferenceModel
from smnoma.services.rate_service import ergodic_rates
from smnoma.services.sweep_service import (
    CSV_HEADER,
    METADATA_SCHEMA,
    find_crossover,
    load_metadata,
    read_csv,
    run_ber,
    run_study,
    run_sweep,
    variant_config,
    variant_name,
    write_csv,
    write_metadata,
)

from tests.conftest import make_config


def _row(scheme, snr_db, sum_rate, ber=None):
    return SweepRow(scheme=scheme, snr_db=snr_db, sum_rate=sum_rate, worst_rate=sum_rate / 4,
                    index_ber=ber, symbol_ber=ber, n_trials=8, seed=2017, config_digest='0123abcd0123abcd')


def _crossing_result(grid, smn, cmn):
    rows = [_row(Scheme.SMN, s, v) for s, v in zip(grid, smn)]
    rows += [_row(Scheme.CMN, s, v) for s, v in zip(grid, cmn)]
    return SweepResult(rows=tuple(rows))


class TestRunSweep:
    def test_one_row_per_scheme_and_snr(self, small_cfg):
        result = run_sweep(small_cfg)
        assert len(result) == 6
        assert [r.scheme for r in result.rows] == [Scheme.SMN] * 3 + [Scheme.CMN] * 3
        assert [r.snr_db for r in result.for_scheme(Scheme.CMN)] == [0.0, 10.0, 20.0]

    def test_ber_only_for_smn(self, small_cfg):
        result = run_sweep(small_cfg)
        for row in result.for_scheme(Scheme.SMN):
            assert 0.0 <= row.index_ber <= 1.0
            assert 0.0 <= row.symbol_ber <= 1.0
        for row in result.for_scheme(Scheme.CMN):
            assert row.index_ber is None and row.symbol_ber is None

    def test_worst_rate_below_mean_user_rate(self, small_cfg):
        for row in run_sweep(small_cfg).rows:
            assert row.worst_rate <= min(row.per_user_rates) + 1e-12
            assert row.sum_rate == pytest.approx(sum(row.per_user_rates), rel=1e-12)

    def test_single_scheme(self, small_cfg):
        result = run_sweep(small_cfg, [Scheme.CMN])
        assert {r.scheme for r in result.rows} == {Scheme.CMN}
        assert result.metadata['schemes'] == ['CMN']

    def test_smn_rows_match_ergodic_rates(self, small_cfg):
        result = run_sweep(small_cfg, [Scheme.SMN])
        for snr_db in small_cfg.snr_grid_db:
            assert result.row(Scheme.SMN, snr_db).sum_rate == ergodic_rates(small_cfg, snr_db).sum_rate

    def test_deterministic(self, small_cfg):
        assert run_sweep(small_cfg).rows == run_sweep(small_cfg).rows

    def test_worker_count_does_not_change_output(self, small_cfg, tmp_path):
        cfg = small_cfg.with_overrides(n_trials=6)
        write_csv(run_sweep(cfg, workers=1, chunk_size=2), tmp_path / "serial.csv")
        write_csv(run_sweep(cfg, workers=2, chunk_size=2), tmp_path / "parallel.csv")
        assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "parallel.csv").read_bytes()

    def test_degenerate_groups_have_no_index_ber(self):
        cfg = make_config(n_tx=2, n_trials=2)
        for row in run_sweep(cfg, [Scheme.SMN]).rows:
            assert row.index_ber is None
            assert row.symbol_ber is not None

    def test_standard_error_halves_with_four_times_the_trials(self, small_cfg):
        few = run_sweep(small_cfg.with_overrides(n_trials=40), [Scheme.CMN])
        many = run_sweep(small_cfg.with_overrides(n_trials=160), [Scheme.CMN])
        for snr_db in small_cfg.snr_grid_db:
            ratio = many.row(Scheme.CMN, snr_db).sum_rate_se / few.row(Scheme.CMN, snr_db).sum_rate_se
            assert 0.3 <= ratio <= 0.8

    def test_single_trial(self, small_cfg):
        result = run_sweep(small_cfg.with_overrides(n_trials=1))
        assert all(math.isnan(r.sum_rate_se) for r in result.rows)


class TestRunBer:
    def test_noiseless_is_error_free(self, single_pair_cfg):
        cfg = single_pair_cfg.with_overrides(mrc_normalized=True)
        assert run_ber(cfg, 10.0, 300, noiseless=True) == (0.0, 0.0)

    def test_noiseless_with_cancelled_interference(self, small_cfg):
        cfg = small_cfg.with_overrides(mrc_normalized=True, interference_model=InterferenceModel.CANCELLED)
        assert run_ber(cfg, 10.0, 60, noiseless=True) == (0.0, 0.0)

    @pytest.mark.parametrize("overrides", [{}, {'n_rx': 1}, {'qam_order': 16}, {'n_tx': 8}])
    def test_noiseless_defaults_are_error_free(self, overrides):
        """MRC literal, interferencia blanqueada y K = 2: sin ruido no hay errores."""
        cfg = make_config(**overrides)
        load = cfg.n_pairs * (cfg.index_bits + cfg.symbol_bits)
        assert run_ber(cfg, 10.0, 40 * load, noiseless=True) == (0.0, 0.0)

    @pytest.mark.parametrize("snr_db", [-10.0, 30.0, 60.0])
    def test_noiseless_paper_scenario_is_error_free(self, paper_cfg, snr_db):
        load = paper_cfg.n_pairs * (paper_cfg.index_bits + paper_cfg.symbol_bits)
        assert run_ber(paper_cfg, snr_db, 5 * load, noiseless=True) == (0.0, 0.0)

    def test_ber_falls_with_snr(self, single_pair_cfg):
        cfg = single_pair_cfg.with_overrides(mrc_normalized=True)
        curve = [run_ber(cfg, snr, 3000) for snr in (-10.0, 0.0, 10.0, 20.0)]
        for (i0, s0), (i1, s1) in zip(curve, curve[1:]):
            assert i1 <= i0 + 0.02
            assert s1 <= s0 + 0.02
        assert curve[-1][1] < curve[0][1]

    @pytest.mark.parametrize("n_bits", [0, 4, 301])
    def test_bit_count_must_fill_channel_uses(self, single_pair_cfg, n_bits):
        with pytest.raises(BitLengthError):
            run_ber(single_pair_cfg, 10.0, n_bits)


class TestPersistence:
    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        write_csv(SweepResult(rows=()), path)
        assert path.read_text(encoding='utf-8') == ','.join(CSV_HEADER) + '\n'

    def test_round_trip(self, tmp_path):
        result = SweepResult(rows=(_row(Scheme.SMN, 10.0, 3.5, ber=0.125), _row(Scheme.CMN, 10.0, 2.75)))
        path = tmp_path / "sweep.csv"
        write_csv(result, path)
        assert read_csv(path) == result
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[1] == 'SMN,10,3.5,0.875,0.125,0.125,8,2017,0123abcd0123abcd'
        assert lines[2] == 'CMN,10,2.75,0.6875,,,8,2017,0123abcd0123abcd'

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file.txt"
        blocker.write_text("x")
        with pytest.raises(OutputError) as exc:
            write_csv(SweepResult(rows=()), blocker / "out.csv")
        assert exc.value.error_code == 'IO_ERROR'

    def test_no_partial_file_on_failure(self, tmp_path):
        blocker = tmp_path / "file.txt"
        blocker.write_text("x")
        with pytest.raises(OutputError):
            write_csv(SweepResult(rows=()), blocker / "out.csv")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["file.txt"]

    def test_metadata_sidecar(self, small_cfg, tmp_path):
        result = run_sweep(small_cfg.with_overrides(n_trials=2), profile='testing')
        path = tmp_path / "sweep.csv"
        write_csv(result, path)
        meta_path = write_metadata(result, path)
        assert meta_path.endswith("sweep.csv.meta.json")

        with open(meta_path, encoding='utf-8') as f:
            document = json.load(f)
        assert document['schema'] == METADATA_SCHEMA
        assert document['rows'] == 6
        assert document['profile'] == 'testing'
        assert document['snr_reference'] == 'receive'
        assert document['config']['seed'] == small_cfg.seed
        assert load_metadata(path)['config_digest'] == result.rows[0].config_digest
        assert datetime.fromisoformat(document['created_at']).utcoffset() == timedelta(0)

    def test_missing_metadata(self, tmp_path):
        assert load_metadata(tmp_path / "none.csv") is None


class TestCrossover:
    def test_exact_zero_counts(self):
        result = _crossing_result([0.0, 10.0, 20.0], [3.0, 4.0, 5.0], [1.0, 4.0, 7.0])
        assert find_crossover(result) == [10.0]

    def test_linear_interpolation(self):
        result = _crossing_result([0.0, 10.0], [2.0, 3.0], [1.0, 4.0])
        assert find_crossover(result) == [pytest.approx(5.0)]

    def test_no_crossing(self):
        result = _crossing_result([0.0, 10.0], [2.0, 3.0], [1.0, 1.0])
        assert find_crossover(result) == []


class TestStudy:
    def test_variant_config_repeats_distances(self, small_cfg):
        cfg = variant_config(small_cfg, {'n_pairs': 1})
        assert cfg.distances_km == (0.15, 0.1)
        assert variant_name(cfg) == 'K1_M4_Nt4'

    def test_one_csv_per_variant(self, small_cfg, tmp_path):
        base = small_cfg.with_overrides(n_trials=2)
        results = run_study(base, [{'n_pairs': 1}, {'qam_order': 2}], [Scheme.SMN], out_dir=str(tmp_path))
        assert set(results) == {'K1_M4_Nt4', 'K2_M2_Nt4'}
        for name in results:
            assert (tmp_path / f"study_{name}.csv").exists()
            assert (tmp_path / f"study_{name}.csv.meta.json").exists()
