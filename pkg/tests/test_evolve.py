import numpy as np
import pytest

import kerrsqueeze as kq
from kerrsqueeze.errors import IntegratorError, InvalidParameterError
from kerrsqueeze.evolve import hamiltonian_eig, propagator
from kerrsqueeze.hamiltonian import TWO_PI

from conftest import KERR_MHZ


def kerr_only(dim, K=KERR_MHZ):
    osc = kq.OscillatorParams(kerr=K)
    return kq.build_driven_kerr(osc, kq.DriveParams(0.0, 0.0), dim)


class TestUnitary:
    def test_zero_time(self):
        psi = kq.coherent_state(1.0, 30)
        out = kq.evolve_unitary(kerr_only(30), 0.0, psi)
        assert kq.fidelity(psi, out) > 1 - 1e-14

    def test_kerr_revival(self):
        # phases e^{i pi n(n-1)} = 1 at t = 1/K: exact coherent revival
        dim = kq.suggest_dim_coherent(2.0)
        psi = kq.coherent_state(2.0, dim)
        out = kq.evolve_unitary(kerr_only(dim), 1.0 / KERR_MHZ, psi)
        assert kq.fidelity(psi, out) > 1 - 1e-6

    def test_detuning_rotation(self):
        dim = 40
        osc = kq.OscillatorParams(kerr=1e-30)
        H = kq.build_driven_kerr(osc, kq.DriveParams(0.13, 0.0), dim)
        psi = kq.coherent_state(1.0, dim)
        t = 0.7
        out = kq.evolve_unitary(H, t, psi)
        a, _ = kq.ladder_operators(dim)
        before = kq.expectation(a, psi)
        after = kq.expectation(a, out)
        assert abs(after - before * np.exp(-1j * TWO_PI * 0.13 * t)) < 1e-8

    def test_norm_preserved(self):
        psi = kq.coherent_state(1.5, 40)
        out = kq.evolve_unitary(kerr_only(40), 3.7, psi)
        assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-10

    def test_energy_conserved(self):
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.01),
                                 kq.DriveParams(0.1, 1.0), 60)
        psi = kq.coherent_state(1.0, 60)
        e0 = kq.expectation(H, psi).real
        out = kq.evolve_unitary(H, 2.0, psi)
        e1 = kq.expectation(H, out).real
        assert abs(e1 - e0) < 1e-9 * max(abs(e0), 1.0)

    def test_non_hermitian_rejected(self):
        a, _ = kq.ladder_operators(10)
        with pytest.raises(InvalidParameterError):
            kq.evolve_unitary(a, 1.0, kq.fock_state(0, 10))

    def test_eig_cache_hit(self):
        H = kerr_only(25)
        w1, V1 = hamiltonian_eig(H)
        w2, V2 = hamiltonian_eig(kq.OperatorMatrix(H.elements, 25,
                                                   hermitian_flag=True))
        assert w1 is w2 and V1 is V2


class TestLindblad:
    def test_closed_limit_matches_unitary(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            dim = rng.integers(6, 21)
            Hm = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            Hm = 0.5 * (Hm + Hm.conj().T)
            H = kq.OperatorMatrix(Hm, dim, hermitian_flag=True)
            amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            psi = kq.QuantumState(amps / np.linalg.norm(amps))
            a, _ = kq.ladder_operators(dim)
            rho = kq.evolve_lindblad(H, [(a, 0.0)], 0.5,
                                     psi.to_density_matrix(), refine=False)
            out = kq.evolve_unitary(H, 0.5, psi)
            assert 1.0 - kq.fidelity(out, rho) < 1e-7

    def test_coherent_decay_law(self):
        dim = 40
        kappa = 0.05
        H = kq.OperatorMatrix(np.zeros((dim, dim), complex), dim,
                              hermitian_flag=True)
        a, _ = kq.ladder_operators(dim)
        rho = kq.coherent_state(2.0, dim).to_density_matrix()
        t = 2.0
        out = kq.evolve_lindblad(H, [(a, kappa)], t, rho, refine=False)
        n = kq.expectation(kq.number_operator(dim), out).real
        expect = 4.0 * np.exp(-TWO_PI * kappa * t)
        assert abs(n - expect) / expect < 1e-4

    def test_fock_relaxation(self):
        dim = 6
        kappa = 0.08
        H = kq.OperatorMatrix(np.zeros((dim, dim), complex), dim,
                              hermitian_flag=True)
        a, _ = kq.ladder_operators(dim)
        rho = kq.fock_state(1, dim).to_density_matrix()
        t = 1.5
        out = kq.evolve_lindblad(H, [(a, kappa)], t, rho, refine=False)
        p1 = out.elements[1, 1].real
        p0 = out.elements[0, 0].real
        assert abs(p1 - np.exp(-TWO_PI * kappa * t)) < 1e-6
        assert abs(p0 - (1 - np.exp(-TWO_PI * kappa * t))) < 1e-6

    def test_trace_and_positivity(self):
        dim = 25
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.01),
                                 kq.DriveParams(0.05, 0.5), dim)
        a, _ = kq.ladder_operators(dim)
        rho = kq.coherent_state(1.0, dim).to_density_matrix()
        out = kq.evolve_lindblad(H, [(a, 0.02)], 3.0, rho, refine=False)
        assert abs(np.trace(out.elements).real - 1.0) < 1e-7
        assert out.min_eigenvalue() > -1e-7

    def test_halving_convergence(self):
        dim = 20
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.01),
                                 kq.DriveParams(0.05, 0.4), dim)
        a, _ = kq.ladder_operators(dim)
        rho = kq.coherent_state(0.8, dim).to_density_matrix()
        out1 = kq.evolve_lindblad(H, [(a, 0.03)], 1.0, rho, dt_max=0.002,
                                  refine=False)
        out2 = kq.evolve_lindblad(H, [(a, 0.03)], 1.0, rho, dt_max=0.001,
                                  refine=False)
        assert abs(1.0 - kq.fidelity(out1, out2)) < 1e-6

    def test_refine_accepts_easy_problem(self):
        dim = 12
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.005),
                                 kq.DriveParams(0.02, 0.2), dim)
        a, _ = kq.ladder_operators(dim)
        rho = kq.fock_state(1, dim).to_density_matrix()
        out = kq.evolve_lindblad(H, [(a, 0.05)], 0.5, rho, refine=True)
        assert abs(np.trace(out.elements).real - 1.0) < 1e-9

    def test_banded_path_matches_dense(self):
        # ladder collapse runs through the shift-and-scale fast path; a dense
        # copy of the same operator must integrate identically
        dim = 15
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.02),
                                 kq.DriveParams(0.1, 0.6), dim)
        a, _ = kq.ladder_operators(dim)
        dense = a.elements + 1e-300 * np.ones((dim, dim))  # defeat detection
        rho = kq.coherent_state(1.0, dim).to_density_matrix()
        out_banded = kq.evolve_lindblad(H, [(a, 0.05)], 0.8, rho, refine=False)
        out_dense = kq.evolve_lindblad(
            H, [(kq.OperatorMatrix(dense, dim), 0.05)], 0.8, rho, refine=False)
        assert np.abs(out_banded.elements - out_dense.elements).max() < 1e-10

    def test_negative_rate_rejected(self):
        dim = 8
        a, _ = kq.ladder_operators(dim)
        rho = kq.fock_state(0, dim).to_density_matrix()
        with pytest.raises(InvalidParameterError):
            kq.evolve_lindblad(kerr_only(dim), [(a, -0.1)], 1.0, rho)


class TestTrajectory:
    def test_vacuum_stationary(self):
        dim = 20
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.01),
                                 kq.DriveParams(0.1, 0.0), dim)
        a, ad = kq.ladder_operators(dim)
        x = kq.OperatorMatrix(0.5 * (a.elements + ad.elements), dim,
                              hermitian_flag=True)
        p = kq.OperatorMatrix(-0.5j * (a.elements - ad.elements), dim,
                              hermitian_flag=True)
        res = kq.trajectory([(H, 2.0)], kq.fock_state(0, dim), 0.1,
                            {"x": x, "p": p})
        assert np.abs(res.expectations["x"]).max() < 1e-12
        assert np.abs(res.expectations["p"]).max() < 1e-12

    def test_number_conserved_without_drive(self):
        dim = 30
        H = kq.build_driven_kerr(kq.OscillatorParams(kerr=0.008),
                                 kq.DriveParams(0.2, 0.0), dim)
        res = kq.trajectory([(H, 1.5)], kq.coherent_state(1.2, dim), 0.05,
                            {"n": kq.number_operator(dim)})
        n = res.expectations["n"]
        assert np.abs(n - n[0]).max() < 1e-10

    def test_sample_times_strictly_increasing(self):
        dim = 10
        res = kq.trajectory([(kerr_only(dim), 1.0)], kq.fock_state(0, dim),
                            0.25, {})
        assert np.all(np.diff(res.times) > 0)

    def test_segment_handoff(self):
        dim = 25
        osc = kq.OscillatorParams(kerr=0.01)
        H1 = kq.build_driven_kerr(osc, kq.DriveParams(0.0, 1.0), dim)
        H2 = kq.build_driven_kerr(osc, kq.DriveParams(0.0, 0.0), dim)
        res = kq.trajectory([(H1, 0.5), (H2, 0.5)], kq.fock_state(0, dim),
                            0.1, {"n": kq.number_operator(dim)})
        direct = kq.evolve_unitary(H2, 0.5,
                                   kq.evolve_unitary(H1, 0.5,
                                                     kq.fock_state(0, dim)))
        assert kq.fidelity(res.final_state, direct) > 1 - 1e-12
