import numpy as np
import pytest

import kerrsqueeze as kq
from kerrsqueeze.errors import AperiodicTraceError, InvalidDimensionError
from kerrsqueeze.sweep import (
    STATUS_FIT,
    STATUS_OK,
    SweepRecord,
    read_table,
    run_grid,
    write_table,
)

from conftest import KERR_MHZ


def _square_job(params):
    return {"y": params["x"] ** 2}


class TestRunGrid:
    def test_deterministic_across_workers(self):
        points = [{"x": float(v)} for v in (3.0, 1.0, 2.0)]
        seq = run_grid(points, _square_job, workers=1)
        par = run_grid(points, _square_job, workers=2)
        assert seq == par
        assert [r.params["x"] for r in seq] == [1.0, 2.0, 3.0]

    def test_duplicate_points_rejected(self):
        points = [{"x": 1.0}, {"x": 1.0}]
        with pytest.raises(Exception):
            run_grid(points, _square_job)


class TestExtractPeriod:
    def test_known_sinusoid(self):
        ts = np.arange(0, 9.0, 0.01)
        ys = np.cos(2 * np.pi * ts / 2.0)
        assert abs(kq.extract_period(ts, ys) - 2.0) < 0.01

    def test_resample_stability(self):
        ts1 = np.arange(0, 12.0, 0.02)
        ts2 = np.arange(0, 12.0, 0.01)
        f = lambda t: np.cos(2 * np.pi * t / 1.7) + 0.3 * np.cos(4 * np.pi * t / 1.7)
        p1 = kq.extract_period(ts1, f(ts1))
        p2 = kq.extract_period(ts2, f(ts2))
        assert abs(p1 - p2) / p2 < 0.005

    def test_aperiodic_rejected(self):
        ts = np.arange(0, 5.0, 0.01)
        with pytest.raises(AperiodicTraceError):
            kq.extract_period(ts, np.exp(-ts))

    def test_constant_rejected(self):
        ts = np.arange(0, 5.0, 0.01)
        with pytest.raises(AperiodicTraceError):
            kq.extract_period(ts, np.ones_like(ts))


class TestDriveScan:
    def test_undriven_column_flagged(self, op_osc):
        recs = kq.scan_drive_params([0.056], [0.0, 1.5], op_osc, 2.0,
                                    cycles=2, dim=160)
        by_omega = {r.params["omega_mhz"]: r for r in recs}
        assert by_omega[0.0].status == STATUS_FIT
        assert by_omega[1.5].status == STATUS_OK
        assert "period_us" in by_omega[1.5].metrics

    def test_operating_point_metrics_present(self, op_osc):
        recs = kq.scan_drive_params([0.056], [2.01], op_osc, 2.0,
                                    cycles=2, dim=240)
        m = recs[0].metrics
        assert set(m) >= {"mean_infidelity", "rate_mhz", "n_max", "period_us"}
        assert m["mean_infidelity"] < 0.01


class TestTrotterDtScan:
    def test_divisibility_enforced(self, op_osc_plain):
        recs = kq.scan_trotter_dt([0.07], 0.96, 4.0, op_osc_plain, 0.2,
                                  dim=90)
        assert recs[0].status in (STATUS_FIT, STATUS_OK)

    def test_infidelity_grows_with_dt(self, op_osc_plain):
        recs = kq.scan_trotter_dt([0.04, 0.08, 0.16], 0.96, 4.0,
                                  op_osc_plain, 0.2, dim=90)
        infids = [r.metrics["infidelity_kpo"] for r in recs]
        assert infids[0] < infids[1] < infids[2]


class TestDriveScanTrends:
    def test_nmax_monotone_in_amplitude(self, op_osc):
        recs = kq.scan_drive_params([0.056], [1.0, 1.5, 2.0], op_osc, 2.0,
                                    cycles=2, dim=280)
        nmax = [r.metrics["n_max"] for r in recs]
        assert nmax[0] < nmax[1] < nmax[2]


class TestDecayClosedLimit:
    def test_ratio_zero_matches_closed_run(self):
        osc = kq.OscillatorParams(kerr=0.02)
        drive = kq.DriveParams(0.1, 0.4)
        dim = 60
        psi0 = kq.fock_state(0, dim)
        H = kq.build_driven_kerr(osc, drive, dim)
        D = kq.displacement_operator(1.0, dim)
        disp = kq.QuantumState(D.elements @ psi0.amplitudes)
        traj = kq.trajectory([(H, 10.0)], disp, 0.01,
                             {"n": kq.number_operator(dim)})
        T = kq.extract_period(traj.times, traj.expectations["n"])
        closed = kq.run_cyclic_squeeze(osc, drive, 1.0, 2, T, psi0,
                                       rotation="none")
        lind = kq.run_cyclic_squeeze(osc, drive, 1.0, 2, T, psi0,
                                     rotation="none", lindblad=True,
                                     dt_max=0.002)
        defect = 1.0 - kq.fidelity(closed.snapshots[-1], lind.snapshots[-1])
        assert defect < 1e-6


class TestDetuningTable:
    def test_tabulated_optima(self, op_osc_plain):
        # tabulated rows: |beta|^2 = 4 -> 50 kHz, 36 -> 350 kHz
        recs = kq.optimize_detuning([4.0, 36.0], op_osc_plain, dt=0.08,
                                    steps=20)
        by = {r.params["beta_sq"]: r.metrics["delta_opt_mhz"] for r in recs}
        assert abs(by[4.0] - 0.050) <= 0.2 * 0.050
        assert abs(by[36.0] - 0.350) <= 0.2 * 0.350

    def test_monotone_in_displacement(self, op_osc_plain):
        recs = kq.optimize_detuning([1.0, 4.0, 36.0], op_osc_plain, dt=0.08,
                                    steps=20, dim=0)
        opts = [r.metrics["delta_opt_mhz"] for r in recs]
        assert opts[0] <= opts[1] <= opts[2]

    @pytest.mark.xfail(
        reason="first-order-Kerr model puts the |beta|^2=1 optimum at "
               "~14.6 kHz for any step count; the tabulated 6 kHz depends "
               "on unpublished simulation settings", strict=False)
    def test_tabulated_single_photon_row(self, op_osc_plain):
        recs = kq.optimize_detuning([1.0], op_osc_plain, dt=0.08, steps=30,
                                    dim=90)
        opt = recs[0].metrics["delta_opt_mhz"]
        assert abs(opt - 0.006) <= 0.5 * 0.006


class TestQubitExcitation:
    def _jc(self, g):
        return kq.JcParams(cavity_freq=0.0, qubit_freq=-1320.0,
                           anharmonicity=194.6, coupling=g, qubit_levels=2)

    def test_decoupled_stays_ground(self):
        recs = kq.scan_qubit_excitation(self._jc(0.0), [1.0, 4.0], steps=4,
                                        cavity_dim=60)
        for r in recs:
            for v in r.metrics.values():
                assert abs(v) < 1e-20

    def test_monotone_in_displacement_and_bounded(self):
        recs = kq.scan_qubit_excitation(self._jc(90.0), [1.0, 4.0, 16.0],
                                        steps=4, cavity_dim=132)
        at_final = [r.metrics["p_excited_step_4"] for r in recs]
        assert at_final[0] < at_final[1] < at_final[2]
        for r in recs:
            for v in r.metrics.values():
                assert 0.0 <= v <= 1.0

    def test_budget_guard(self):
        with pytest.raises(InvalidDimensionError):
            kq.scan_qubit_excitation(self._jc(50.0), [2000.0], steps=2)


class TestTable:
    def test_round_trip_and_status(self, tmp_path):
        recs = [
            SweepRecord(params={"delta_mhz": 0.1, "omega_mhz": 2.0},
                        metrics={"rate_mhz": 0.0123456789012345678},
                        status=STATUS_OK),
            SweepRecord(params={"delta_mhz": 0.1, "omega_mhz": 0.0},
                        metrics={}, status=STATUS_FIT),
        ]
        path = tmp_path / "t.csv"
        write_table(recs, path, meta={"sweep_kind": "drive_params"})
        back = read_table(path)
        assert back[0].params["omega_mhz"] == 0.0
        assert back[0].status == STATUS_FIT
        assert abs(back[1].metrics["rate_mhz"] - 0.0123456789012345678) < 1e-18

    def test_byte_identical_rewrite(self, tmp_path):
        recs = [SweepRecord(params={"x": float(i)}, metrics={"y": i * 0.1})
                for i in range(5)]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_table(recs, p1)
        write_table(list(reversed(recs)), p2)
        assert p1.read_bytes() == p2.read_bytes()
