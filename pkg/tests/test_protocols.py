import math

import numpy as np
import pytest

import solitonchain as sc
from solitonchain.errors import ParameterError

from conftest import ETA_CLOSED, T_MIRROR

X_MODE_OCCUPATION = 100.0 / 102.0  # (strong/weak)^2 / ((strong/weak)^2 + 2) at ratio 10


def eof_at_time(spec, t):
    basis = sc.build_basis(spec.n_sites, 2)
    eig = sc.diagonalize(sc.build_hamiltonian(spec, basis))
    psi0 = sc.prepare_initial(sc.InitialStateSpec(sites=spec.defect_pair), basis)
    rho = sc.reduce_to_two_sites(sc.evolve(psi0, eig, t), *spec.defect_pair)
    return sc.eof(rho)


class TestMirroringTimeHelper:
    def test_two_value_chain_uses_closed_form(self, n7_spec):
        assert sc.chain_mirroring_time(n7_spec) == pytest.approx(T_MIRROR, abs=1e-12)

    def test_uniform_chain_is_its_own_trimer(self, trimer_spec):
        assert sc.chain_mirroring_time(trimer_spec) == pytest.approx(
            math.pi / (math.sqrt(2) * ETA_CLOSED), abs=1e-12
        )

    def test_three_coupling_values_rejected(self):
        spec = sc.ChainSpec(4, (0.1, 0.2, 0.3), (0.0,) * 4, site_a=0, site_c=3)
        with pytest.raises(ParameterError):
            sc.chain_mirroring_time(spec)


class TestRunEntangling:
    def test_trace_shape_and_ranges(self, n7_spec):
        trace = sc.run_entangling(n7_spec, t_max=100.0, dt=0.5)
        assert np.all(np.diff(trace.times) > 0)
        for series in (trace.fidelity_initial, trace.eof):
            assert np.all((series >= 0) & (series <= 1 + 1e-12))
        assert trace.fidelity_reference is None
        assert trace.metadata["t_m"] == pytest.approx(T_MIRROR, abs=1e-12)

    def test_trimer_reproduces_analytic_profile(self, trimer_spec):
        trace = sc.run_entangling(trimer_spec, t_max=2 * T_MIRROR, dt=3.7)
        analytic = sc.analytic_eof_profile(ETA_CLOSED, trace.times)
        np.testing.assert_allclose(trace.eof, analytic, atol=1e-8)

    def test_numeric_close_to_analytic_at_key_times(self, n7_spec):
        for t in (0.5 * T_MIRROR, T_MIRROR):
            assert abs(eof_at_time(n7_spec, t) - sc.analytic_eof_profile(ETA_CLOSED, t)) < 0.05

    def test_mirror_symmetry(self, n7_spec):
        trace = sc.run_entangling(n7_spec, t_max=60.0, dt=1.5)
        mirrored = sc.run_entangling(n7_spec.mirrored(), t_max=60.0, dt=1.5)
        np.testing.assert_allclose(trace.fidelity_initial, mirrored.fidelity_initial, atol=1e-9)
        np.testing.assert_allclose(trace.eof, mirrored.eof, atol=1e-9)

    def test_requires_defects(self):
        bare = sc.ChainSpec(3, (0.5, 0.5), (0.0,) * 3)
        with pytest.raises(ParameterError):
            sc.run_entangling(bare, 10.0, 1.0)

    def test_csv_round_trip(self, n7_spec):
        trace = sc.run_entangling(n7_spec, t_max=5.0, dt=1.0)
        lines = trace.to_csv().strip().split("\n")
        assert lines[0] == "t,fidelity_initial,eof"
        assert len(lines) == 7
        values = [float(x) for x in lines[3].split(",")]
        assert values[0] == trace.times[2]


class TestAsyncSweep:
    def test_zero_delay_matches_entangling_at_t_m(self, n7_spec):
        ((_, value),) = sc.run_async_sweep(n7_spec, [0.0])
        assert value == pytest.approx(eof_at_time(n7_spec, T_MIRROR), abs=1e-10)

    def test_delay_robustness_values(self, n7_spec):
        rows = dict(sc.run_async_sweep(n7_spec, [0.02, 0.05, 0.10]))
        assert rows[0.10] == pytest.approx(0.91, abs=0.03)
        assert rows[0.02] >= 0.93
        assert rows[0.05] >= 0.93

    def test_mirror_converse_identical(self, n7_spec):
        # delaying the A injection instead is the mirrored protocol
        direct = sc.run_async_sweep(n7_spec, [0.1, 0.3])
        converse = sc.run_async_sweep(n7_spec.mirrored(), [0.1, 0.3])
        for (f1, v1), (f2, v2) in zip(direct, converse):
            assert f1 == f2
            assert v1 == pytest.approx(v2, abs=1e-9)

    def test_delay_validation(self, n7_spec):
        with pytest.raises(ParameterError):
            sc.run_async_sweep(n7_spec, [0.6])


@pytest.fixture(scope="module")
def storage_trace():
    spec = sc.build_storage_chain(0.1, 1.0)
    return sc.run_storage(spec, t_max_after=120.0, dt=0.5)


class TestRunStorage:
    def test_grid_and_metadata(self, storage_trace):
        assert np.all(np.diff(storage_trace.times) > 0)
        t_q = storage_trace.metadata["quench_time"]
        assert t_q == pytest.approx(T_MIRROR, abs=1e-12)
        assert storage_trace.fidelity_reference is not None

    def test_reference_fidelity_is_one_at_quench(self, storage_trace):
        t_q = storage_trace.metadata["quench_time"]
        at_quench = np.searchsorted(storage_trace.times, t_q)
        assert storage_trace.times[at_quench] == pytest.approx(t_q)
        assert storage_trace.fidelity_reference[at_quench] == pytest.approx(1.0, abs=1e-12)

    def test_eof_continuous_across_quench(self, storage_trace):
        t_q = storage_trace.metadata["quench_time"]
        spec = sc.build_storage_chain(0.1, 1.0)
        assert eof_at_time(spec, t_q) == pytest.approx(
            storage_trace.eof[np.searchsorted(storage_trace.times, t_q)], abs=1e-10
        )

    def test_csv_includes_reference_column(self, storage_trace):
        header = storage_trace.to_csv().split("\n", 1)[0]
        assert header == "t,fidelity_initial,fidelity_reference,eof"

    def test_requires_central_defect(self):
        spec = sc.ChainSpec(5, (0.1,) * 4, (0.0,) * 5, site_a=0, site_c=4)
        with pytest.raises(ParameterError):
            sc.run_storage(spec, 10.0, 1.0)


class TestLocalizedModeReport:
    def test_zero_mode_profile(self):
        half = sc.ChainSpec(5, (1.0, 0.1, 0.1, 1.0), (0.0,) * 5)
        report = sc.localized_mode_report(half)
        assert report.energies.shape == (5,)
        assert abs(report.energies[report.zero_index]) < 1e-12
        occ = report.zero_mode_occupations
        assert occ[2] == pytest.approx(X_MODE_OCCUPATION, abs=1e-12)
        # profile proportional to (1, 0, -strong/weak, 0, 1) squared
        np.testing.assert_allclose(occ, [1 / 102, 0, 100 / 102, 0, 1 / 102], atol=1e-12)

    def test_exactly_one_zero_energy_state(self):
        half = sc.ChainSpec(5, (1.0, 0.1, 0.1, 1.0), (0.0,) * 5)
        report = sc.localized_mode_report(half)
        assert np.sum(np.abs(report.energies) < 1e-10) == 1

    def test_rows_are_normalized(self):
        half = sc.ChainSpec(5, (1.0, 0.1, 0.1, 1.0), (0.0,) * 5)
        report = sc.localized_mode_report(half)
        np.testing.assert_allclose(report.occupations.sum(axis=1), np.ones(5), atol=1e-12)
