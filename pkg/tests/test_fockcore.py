import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

import kerrsqueeze as kq
from kerrsqueeze.errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidParameterError,
    TruncationFault,
    TruncationWarning,
)
from kerrsqueeze.fockcore import (
    displacement_matrix,
    expm_antihermitian,
    squeezed_vacuum_amplitudes,
)


def quadrature_ops(dim):
    a, ad = kq.ladder_operators(dim)
    x = kq.OperatorMatrix(0.5 * (a.elements + ad.elements), dim, hermitian_flag=True)
    p = kq.OperatorMatrix(-0.5j * (a.elements - ad.elements), dim,
                          hermitian_flag=True)
    return x, p


class TestLadder:
    def test_smallest_size(self):
        a, ad = kq.ladder_operators(2)
        assert np.array_equal(a.elements, [[0, 1], [0, 0]])

    def test_number_diagonal(self):
        a, ad = kq.ladder_operators(5)
        n = ad.elements @ a.elements
        assert np.allclose(np.diag(n), [0, 1, 2, 3, 4])

    def test_truncated_commutator(self):
        a, ad = kq.ladder_operators(4)
        comm = a.elements @ ad.elements - ad.elements @ a.elements
        assert np.allclose(np.diag(comm), [1, 1, 1, -3])
        assert np.allclose(comm, np.diag(np.diag(comm)))

    def test_dim_too_small(self):
        with pytest.raises(InvalidDimensionError):
            kq.ladder_operators(1)


class TestDisplacement:
    def test_zero_is_identity(self):
        D = kq.displacement_operator(0.0, 12)
        assert np.allclose(D.elements, np.eye(12), atol=1e-12)

    def test_coherent_mean_photon(self):
        dim = kq.suggest_dim_coherent(2.0)
        st_ = kq.coherent_state(2.0, dim)
        n = kq.expectation(kq.number_operator(dim), st_).real
        assert abs(n - 4.0) < 1e-6

    def test_vacuum_overlap(self):
        D = kq.displacement_operator(1.0, 40)
        assert abs(D.elements[0, 0] - np.exp(-0.5)) < 1e-10

    def test_inverse_composition(self):
        D = kq.displacement_operator(1.3 + 0.4j, 60)
        Dm = kq.displacement_operator(-(1.3 + 0.4j), 60)
        assert np.abs(D.elements @ Dm.elements - np.eye(60)).max() < 1e-9

    def test_truncation_warning(self):
        with pytest.warns(TruncationWarning):
            kq.displacement_operator(3.0, 12)

    def test_composition_law_on_interior_columns(self):
        # D(b) D(g) = e^{i Im(b g*)} D(b+g); displaced Fock states spread by
        # ~2|g| sqrt(n), so the identity is checked on columns that stay
        # inside the truncation
        rng = np.random.default_rng(1)
        dim, ncol = 80, 16
        for _ in range(5):
            b = rng.normal(scale=0.7) + 1j * rng.normal(scale=0.7)
            g = rng.normal(scale=0.7) + 1j * rng.normal(scale=0.7)
            lhs = kq.displacement_operator(b, dim).elements \
                @ kq.displacement_operator(g, dim).elements
            rhs = np.exp(1j * np.imag(b * np.conj(g))) \
                * kq.displacement_operator(b + g, dim).elements
            assert np.abs(lhs[:, :ncol] - rhs[:, :ncol]).max() < 1e-8

    def test_exact_matrix_elements_match_operator(self):
        dim = 60
        D_op = kq.displacement_operator(0.9 - 0.3j, dim).elements
        D_exact = displacement_matrix(0.9 - 0.3j, dim)
        assert np.abs(D_op[:12, :12] - D_exact[:12, :12]).max() < 1e-10


class TestSqueeze:
    def test_zero_is_identity(self):
        S = kq.squeeze_operator(0.0, 12)
        assert np.allclose(S.elements, np.eye(12), atol=1e-12)

    def test_quadrature_variance(self):
        dim = 60
        st_ = kq.squeezed_fock_state(0.5, 0, dim)
        x, _ = quadrature_ops(dim)
        x2 = x.elements @ x.elements
        var = kq.expectation(x2, st_).real - kq.expectation(x, st_).real ** 2
        assert abs(var - np.exp(-1.0) / 4.0) < 1e-5

    def test_level_definition(self):
        assert abs(kq.squeezing_level_db(1.0) - 8.686) < 1e-3

    def test_closed_form_amplitudes(self):
        dim = 80
        direct = kq.squeeze_operator(0.7, dim).elements[:, 0]
        closed = squeezed_vacuum_amplitudes(0.7, dim)
        phase = direct[0] / closed[0]
        assert np.abs(direct - phase * closed).max() < 1e-9


class TestMakeState:
    def test_fock(self):
        st_ = kq.make_state("fock", 10, n=3)
        expect = np.zeros(10)
        expect[3] = 1
        assert np.allclose(st_.amplitudes, expect)

    def test_coherent_poisson(self):
        st_ = kq.make_state("coherent", 40, beta=1.0)
        assert abs(abs(st_.amplitudes[1]) ** 2 - np.exp(-1.0)) < 1e-9

    def test_squeezed_fock_zero_xi(self):
        st_ = kq.make_state("squeezed_fock", 12, xi=0.0, n=2)
        assert kq.fidelity(st_, kq.fock_state(2, 12)) > 1 - 1e-12

    def test_fock_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            kq.make_state("fock", 5, n=5)

    def test_tail_fault_detection(self):
        with pytest.warns(TruncationWarning):
            st_ = kq.squeezed_fock_state(1.5, 0, 20)
        with pytest.raises(TruncationFault):
            st_.check_tail(1e-7)


class TestFidelity:
    def test_self(self):
        st_ = kq.coherent_state(1.0, 30)
        assert abs(kq.fidelity(st_, st_) - 1.0) < 1e-12

    def test_orthogonal(self):
        assert kq.fidelity(kq.fock_state(0, 10), kq.fock_state(1, 10)) < 1e-14

    def test_coherent_vacuum_overlap(self):
        f = kq.fidelity(kq.fock_state(0, 40), kq.coherent_state(1.0, 40))
        assert abs(f - np.exp(-1.0)) < 1e-9

    def test_pure_mixed_symmetry(self):
        psi = kq.coherent_state(0.7, 25)
        rho = kq.fock_state(1, 25).to_density_matrix()
        assert abs(kq.fidelity(psi, rho) - kq.fidelity(rho, psi)) < 1e-12

    def test_mixed_mixed_matches_pure_limit(self):
        a = kq.coherent_state(0.5, 30)
        b = kq.squeezed_fock_state(0.3, 0, 30)
        f_pure = kq.fidelity(a, b)
        f_mixed = kq.fidelity(a.to_density_matrix(), b.to_density_matrix())
        # the Uhlmann square root amplifies roundoff to ~sqrt(eps)
        assert abs(f_pure - f_mixed) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            kq.fidelity(kq.fock_state(0, 10), kq.fock_state(0, 11))


class TestUnitarity:
    @pytest.mark.parametrize("dim,beta", [(50, 1.5), (300, 3.0)])
    def test_displacement_unitary(self, dim, beta):
        U = kq.displacement_operator(beta, dim).elements
        assert np.abs(U.conj().T @ U - np.eye(dim)).max() < 1e-9

    @pytest.mark.parametrize("dim,xi", [(80, 0.8), (300, 1.0)])
    def test_squeeze_unitary(self, dim, xi):
        U = kq.squeeze_operator(xi, dim).elements
        assert np.abs(U.conj().T @ U - np.eye(dim)).max() < 1e-9

    def test_two_route_exponentials_agree(self):
        # eigendecomposition route vs Pade scaling-squaring on the generator
        dim = 100
        a, ad = kq.ladder_operators(dim)
        for G in (1.1 * ad.elements - 1.1 * a.elements,
                  0.3 * (a.elements @ a.elements
                         - ad.elements @ ad.elements)):
            assert np.abs(expm_antihermitian(G)
                          - scipy.linalg.expm(G)).max() < 1e-9


@settings(max_examples=25, deadline=None)
@given(re=st.floats(-1.5, 1.5), im=st.floats(-1.5, 1.5))
def test_displacement_always_unitary(re, im):
    U = kq.displacement_operator(complex(re, im), 48).elements
    assert np.abs(U.conj().T @ U - np.eye(48)).max() < 1e-9


@settings(max_examples=25, deadline=None)
@given(re=st.floats(-1.0, 1.0), im=st.floats(-1.0, 1.0), n=st.integers(0, 3))
def test_squeezed_fock_normalized(re, im, n):
    st_ = kq.squeezed_fock_state(complex(re, im), n, 80)
    assert abs(np.linalg.norm(st_.amplitudes) - 1.0) < 1e-10
