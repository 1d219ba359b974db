import math

import numpy as np
import pytest

import solitonchain as sc
from solitonchain.disorder import DIAG_TAG, OFFDIAG_TAG
from solitonchain.errors import ParameterError
from solitonchain.rng import SplitMix64, mix64


def small_cfg(kind, levels, n=20, **kw):
    return sc.DisorderConfig(kind=kind, levels=levels, n_realizations=n, base_seed=777, **kw)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ParameterError):
            sc.DisorderConfig(kind="bogus", levels=(0.1,), n_realizations=10)
        with pytest.raises(ParameterError):
            sc.DisorderConfig(kind="diagonal", levels=(-0.1,), n_realizations=10)
        with pytest.raises(ParameterError):
            sc.DisorderConfig(kind="diagonal", levels=(0.1,), n_realizations=0)
        with pytest.raises(ParameterError):
            sc.DisorderConfig(kind="diagonal", levels=(0.1,), n_realizations=5, dt=0.0)


class TestSubstreams:
    def test_realization_spec_is_pure(self, n7_spec):
        a = sc.disordered_spec(n7_spec, "both", 0.5, 123, 7)
        b = sc.disordered_spec(n7_spec, "both", 0.5, 123, 7)
        assert a.to_json() == b.to_json()

    def test_both_uses_independent_streams(self, n7_spec):
        noisy = sc.disordered_spec(n7_spec, "both", 1.0, 55, 3)
        diag_stream = SplitMix64(mix64(55, 3, DIAG_TAG))
        offdiag_stream = SplitMix64(mix64(55, 3, OFFDIAG_TAG))
        onsite = [0.1 * diag_stream.uniform_pm_half() for _ in range(7)]
        coups = [
            j + 0.1 * offdiag_stream.uniform_pm_half() for j in n7_spec.couplings
        ]
        np.testing.assert_allclose(noisy.onsite, onsite, atol=0)
        np.testing.assert_allclose(noisy.couplings, coups, atol=0)

    def test_draws_do_not_depend_on_level(self, n7_spec):
        lo = sc.disordered_spec(n7_spec, "diagonal", 0.2, 9, 4)
        hi = sc.disordered_spec(n7_spec, "diagonal", 0.4, 9, 4)
        np.testing.assert_allclose(np.array(hi.onsite), 2 * np.array(lo.onsite), atol=1e-18)


class TestScenarios:
    def test_clean_level_statistics(self, n7_spec):
        stats = sc.run_scenario1(n7_spec, small_cfg("offdiagonal", (0.0,), n=6))
        level = stats.levels[0]
        assert level.mean >= 0.95
        assert level.std == 0.0
        assert level.n == 6

    def test_sem_invariant(self, n7_spec):
        stats = sc.run_scenario1(n7_spec, small_cfg("diagonal", (0.3,), n=12))
        for level in stats.levels:
            assert level.sem == pytest.approx(level.std / math.sqrt(level.n), abs=1e-12)

    def test_scenario2_dominates_per_realization(self, n7_spec):
        cfg = small_cfg("both", (0.2,), n=15)
        v1 = sc.scenario_eof_values(n7_spec, cfg, 1)
        v2 = sc.scenario_eof_values(n7_spec, cfg, 2)
        assert np.all(v2 >= v1)

    def test_determinism_and_level_order_independence(self, n7_spec):
        cfg_fwd = small_cfg("offdiagonal", (0.1, 0.4), n=8)
        cfg_rev = small_cfg("offdiagonal", (0.4, 0.1), n=8)
        fwd = sc.run_scenario1(n7_spec, cfg_fwd)
        rev = sc.run_scenario1(n7_spec, cfg_rev)
        assert fwd == sc.run_scenario1(n7_spec, cfg_fwd)
        assert fwd.levels[0] == rev.levels[1]
        assert fwd.levels[1] == rev.levels[0]

    def test_thread_pool_matches_serial(self, n7_spec, monkeypatch):
        cfg = small_cfg("both", (0.25,), n=10)
        monkeypatch.delenv("SOLITONCHAIN_THREADS", raising=False)
        serial = sc.run_scenario2(n7_spec, cfg)
        monkeypatch.setenv("SOLITONCHAIN_THREADS", "4")
        threaded = sc.run_scenario2(n7_spec, cfg)
        assert serial == threaded

    def test_requires_defect_pair(self):
        bare = sc.ChainSpec(2, (0.5,), (0.0, 0.0))
        with pytest.raises(ParameterError):
            sc.run_scenario1(bare, small_cfg("diagonal", (0.1,), n=2))


class TestSpectrumStatistics:
    def test_clean_chain_has_four_zero_modes(self, n7_spec):
        stats = sc.spectrum_statistics(n7_spec, "offdiagonal", 0.0, 3, 1)
        assert stats.zero_count == 4
        assert len(stats.mean) == 28

    def test_offdiagonal_protection(self, n7_spec):
        stats = sc.spectrum_statistics(n7_spec, "offdiagonal", 1.0, 25, 2024)
        assert stats.zero_count == 4
        assert set(stats.per_realization_zero_counts) == {4}

    def test_diagonal_breaks_protection(self, n7_spec):
        stats = sc.spectrum_statistics(n7_spec, "diagonal", 1.0, 25, 2024)
        assert any(c < 4 for c in stats.per_realization_zero_counts)
        assert stats.zero_count < 4

    def test_offdiagonal_spectra_symmetric(self, n7_spec):
        basis = sc.build_basis(7, 2)
        for r in range(10):
            noisy = sc.disordered_spec(n7_spec, "offdiagonal", 1.0, 31, r)
            h = sc.build_hamiltonian(noisy, basis).matrix
            sector = np.sort(
                np.concatenate(
                    [np.linalg.eigvalsh(h[sl, sl]) for sl in basis.block_slices[1:]]
                )
            )
            np.testing.assert_allclose(sector, -sector[::-1], atol=1e-9)
            assert np.sum(np.abs(sector) < 1e-10) >= 4


class TestCsv:
    def test_ensemble_csv_schema(self, n7_spec):
        stats = sc.run_scenario1(n7_spec, small_cfg("diagonal", (0.0, 0.2), n=4))
        text = sc.ensemble_stats_csv([stats])
        lines = text.strip().split("\n")
        assert lines[0] == "kind,level_E,n,mean_eof,std,sem,scenario"
        assert len(lines) == 3
        assert lines[1].startswith("diagonal,0,4,")
        assert lines[1].endswith(",1")

    def test_spectrum_csv_schema(self, n7_spec):
        stats = sc.spectrum_statistics(n7_spec, "offdiagonal", 1.0, 4, 5)
        lines = sc.spectrum_csv(stats).strip().split("\n")
        assert lines[0] == "index,mean_energy,std_energy"
        assert len(lines) == 29
