import numpy as np
import pytest

import kerrsqueeze as kq
from kerrsqueeze.errors import DegeneratePhaseError, InvalidParameterError
from kerrsqueeze.protocol import Displace, Evolve, VirtualRotate

from conftest import AMPLITUDE_MHZ, BETA, DETUNING_MHZ, KERR_MHZ


class TestVirtualRotation:
    def test_identity(self):
        psi = kq.coherent_state(1.0, 30)
        out = kq.apply_virtual_rotation(psi, 0.0)
        assert kq.fidelity(psi, out) > 1 - 1e-14

    def test_two_pi(self):
        psi = kq.coherent_state(1.0, 30)
        out = kq.apply_virtual_rotation(psi, 2 * np.pi)
        assert np.abs(out.amplitudes - psi.amplitudes).max() < 1e-12

    def test_coherent_rotation_convention(self):
        # VirtualRotate(theta) maps a -> a e^{-i theta}
        dim = 40
        psi = kq.coherent_state(1.0, dim)
        out = kq.apply_virtual_rotation(psi, np.pi / 2)
        target = kq.coherent_state(np.exp(-1j * np.pi / 2), dim)
        assert kq.fidelity(out, target) > 1 - 1e-12


class TestCalibratePhase:
    def test_aligned_state_gives_zero(self):
        st = kq.squeezed_fock_state(0.6, 0, 60)
        assert abs(kq.calibrate_phase(st)) < 2 * np.pi / 72

    def test_round_trip(self):
        theta0 = 0.37
        st = kq.squeezed_fock_state(0.6, 0, 60)
        rotated = kq.apply_virtual_rotation(st, -theta0)  # e^{i theta0 n}
        rec = kq.calibrate_phase(rotated)
        assert abs(rec - theta0) < 2 * np.pi / 72

    def test_fock_state_degenerate(self):
        with pytest.raises(DegeneratePhaseError):
            kq.calibrate_phase(kq.fock_state(2, 30))

    def test_rotation_nulls_inclination(self):
        st = kq.squeezed_fock_state(0.5, 0, 60)
        tilted = kq.apply_virtual_rotation(st, -0.8)
        theta = kq.calibrate_phase(tilted)
        fixed = kq.apply_virtual_rotation(tilted, theta)
        assert abs(kq.calibrate_phase(fixed)) < 0.02


class TestSchedules:
    def test_cyclic_frame_log_closes(self):
        sched = kq.build_cyclic_schedule(2.0, 4.5, rotation=0.3)
        assert abs(sched.net_frame) < 1e-12
        log = sched.frame_log
        assert abs(log[0] - 2.0) < 1e-12

    @pytest.mark.parametrize("order,steps", [(1, 1), (1, 5), (2, 2), (2, 6)])
    def test_trotter_frame_log_closes(self, order, steps):
        cfg = kq.TrotterConfig(beta=3.0, delta_t=0.08, steps=steps,
                               order=order, detuning=0.2)
        sched = kq.build_trotter_schedule(cfg)
        assert abs(sched.net_frame) < 1e-12

    def test_run_schedule_matches_fast_path(self):
        dim = 80
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        cfg = kq.TrotterConfig(beta=2.0, delta_t=0.1, steps=4, order=1,
                               detuning=0.05)
        H0 = kq.build_driven_kerr(osc, kq.DriveParams(0.05, 0.0), dim)
        sched = kq.build_trotter_schedule(cfg)
        via_schedule = kq.run_schedule(sched, {"kerr": H0},
                                       kq.fock_state(0, dim))
        fast = kq.run_trotter_squeeze(osc, cfg, kq.fock_state(0, dim))
        # displaced-frame path drops the frame constant: global phase only
        assert kq.fidelity(via_schedule, fast.final_state) > 1 - 1e-10

    def test_run_schedule_matches_fast_path_order2(self):
        dim = 80
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        cfg = kq.TrotterConfig(beta=2.0, delta_t=0.1, steps=4, order=2,
                               detuning=0.05)
        H0 = kq.build_driven_kerr(osc, kq.DriveParams(0.05, 0.0), dim)
        via_schedule = kq.run_schedule(kq.build_trotter_schedule(cfg),
                                       {"kerr": H0}, kq.fock_state(0, dim))
        fast = kq.run_trotter_squeeze(osc, cfg, kq.fock_state(0, dim))
        assert kq.fidelity(via_schedule, fast.final_state) > 1 - 1e-10


class TestCyclic:
    def test_zero_cycles_identity(self, op_osc, op_drive):
        psi = kq.fock_state(0, 60)
        res = kq.run_cyclic_squeeze(op_osc, op_drive, BETA, 0, 2.25, psi)
        assert kq.fidelity(res.final_state, psi) > 1 - 1e-14

    def test_single_cycle_squeezes(self, op_osc, op_drive):
        psi = kq.fock_state(0, 240)
        res = kq.run_cyclic_squeeze(op_osc, op_drive, BETA, 1, 2.25, psi,
                                    rotation="none")
        r, _, f = kq.best_fit_squeezed_vacuum(res.snapshots[0])
        assert f > 0.999
        assert 0.15 < r < 0.35

    def test_calibrated_rotation_aligns_snapshot(self, op_osc, op_drive):
        psi = kq.fock_state(0, 240)
        res = kq.run_cyclic_squeeze(op_osc, op_drive, BETA, 1, 2.25, psi,
                                    rotation="calibrated")
        assert abs(kq.calibrate_phase(res.snapshots[0])) < 0.05


class TestTrotter:
    def test_zero_steps(self):
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        cfg = kq.TrotterConfig(beta=4.0, delta_t=0.08, steps=0, detuning=0.2)
        psi = kq.fock_state(0, 50)
        res = kq.run_trotter_squeeze(osc, cfg, psi)
        assert kq.fidelity(res.final_state, psi) > 1 - 1e-14

    def test_zero_kerr_zero_detuning_identity(self):
        # K = 0, Delta = 0: the step is pure displacements, which cancel
        osc = kq.OscillatorParams(kerr=0.0)
        cfg = kq.TrotterConfig(beta=3.0, delta_t=0.1, steps=6, detuning=0.0)
        psi = kq.fock_state(0, 70)
        res = kq.run_trotter_squeeze(osc, cfg, psi)
        assert kq.fidelity(res.final_state, psi) > 1 - 1e-10

    def test_zero_kerr_detuning_kick(self):
        # with detuning the displaced frame keeps a linear term, so one step
        # leaves a residual coherent kick beta (1 - e^{-i 2pi Delta dt/2})^2
        osc = kq.OscillatorParams(kerr=0.0)
        beta, delta, dt, dim = 3.0, 0.3, 0.1, 70
        cfg = kq.TrotterConfig(beta=beta, delta_t=dt, steps=1, detuning=delta)
        res = kq.run_trotter_squeeze(osc, cfg, kq.fock_state(0, dim))
        ang = 2 * np.pi * delta * dt / 2
        kick = beta * (1 - np.exp(-1j * ang)) ** 2
        assert kq.fidelity(res.final_state,
                           kq.coherent_state(kick, dim)) > 1 - 1e-10

    def test_order2_not_worse(self):
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        dim = 70
        exact_cfgs = []
        for order in (1, 2):
            cfg = kq.TrotterConfig(beta=3.0, delta_t=0.2, steps=8,
                                   order=order, detuning=0.1)
            res = kq.run_trotter_squeeze(osc, cfg, kq.fock_state(0, dim))
            dprime = 0.1 - 2 * KERR_MHZ * 9.0
            Hk = kq.build_kpo(osc, kq.FrameParams(3.0), dprime, dim)
            exact = kq.evolve_unitary(Hk, 1.6, kq.fock_state(0, dim))
            exact_cfgs.append(1 - kq.fidelity(exact, res.final_state))
        assert exact_cfgs[1] <= exact_cfgs[0]

    def test_snapshot_levels_monotone_to_peak(self):
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        cfg = kq.TrotterConfig(beta=4.0, delta_t=0.08, steps=10, detuning=0.2)
        res = kq.run_trotter_squeeze(osc, cfg, kq.fock_state(0, 90))
        xis = [kq.best_fit_squeezed_vacuum(s)[0] for s in res.snapshots]
        peak = int(np.argmax(xis))
        assert all(xis[i + 1] >= xis[i] - 1e-9 for i in range(peak))

    def test_pulsed_limit_matches_instantaneous(self):
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        psi = kq.fock_state(0, 80)
        cfg0 = kq.TrotterConfig(beta=2.0, delta_t=0.1, steps=4, detuning=0.05)
        cfg_eps = kq.TrotterConfig(beta=2.0, delta_t=0.1, steps=4,
                                   detuning=0.05,
                                   displacement_duration=1e-9)
        res0 = kq.run_trotter_squeeze(osc, cfg0, psi)
        res_eps = kq.run_trotter_squeeze(osc, cfg_eps, psi)
        assert kq.fidelity(res0.final_state, res_eps.final_state) > 1 - 1e-8

    def test_pulse_duration_reduces_squeezing(self):
        osc = kq.OscillatorParams(kerr=KERR_MHZ)
        psi = kq.fock_state(0, 140)
        out = {}
        for tau in (0.0, 0.01):
            cfg = kq.TrotterConfig(beta=6.0, delta_t=0.08, steps=8,
                                   detuning=0.4, displacement_duration=tau)
            res = kq.run_trotter_squeeze(osc, cfg, psi)
            out[tau] = kq.best_fit_squeezed_vacuum(res.final_state)[0]
        assert out[0.01] < out[0.0]

    def test_order_validation(self):
        with pytest.raises(InvalidParameterError):
            kq.TrotterConfig(beta=1.0, delta_t=0.1, steps=4, order=3)
        with pytest.raises(InvalidParameterError):
            kq.TrotterConfig(beta=1.0, delta_t=0.1, steps=5, order=2)
