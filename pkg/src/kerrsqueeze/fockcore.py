"""Truncated Fock-space linear algebra.

States, ladder/displacement/squeeze operators, overlaps, expectation values
and fidelity, all on a photon-number basis truncated at ``dim`` levels.
Everything here is a pure function of its inputs; the returned objects are
immutable and safe to share between threads.

Conventions
-----------
* x = (a + a†)/2 and p = -i(a - a†)/2, so vacuum variance is 1/4.
* D(beta) = exp(beta a† - beta* a).
* S(xi) = exp(xi*/2 a² - xi/2 a†²); for real xi > 0 the x quadrature is
  squeezed: Var(x) = e^{-2 xi}/4 on S(xi)|0>.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import ceil, exp

import numpy as np
from scipy.special import gammaln, eval_genlaguerre

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidParameterError,
    TruncationFault,
    TruncationWarning,
)

__all__ = [
    "QuantumState",
    "DensityMatrix",
    "OperatorMatrix",
    "ladder_operators",
    "number_operator",
    "displacement_operator",
    "displacement_matrix",
    "squeeze_operator",
    "make_state",
    "fock_state",
    "coherent_state",
    "squeezed_fock_state",
    "squeezed_vacuum_amplitudes",
    "fidelity",
    "expectation",
    "apply_operator",
    "suggest_dim_coherent",
    "suggest_dim_squeezed",
    "expm_antihermitian",
]

NORM_TOL = 1e-10
HERM_TOL = 1e-10
TRACE_TOL = 1e-8
DEFAULT_LEAKAGE_TOL = 1e-7


@dataclass(frozen=True)
class QuantumState:
    """Pure state: complex amplitude vector over the truncated Fock basis."""

    amplitudes: np.ndarray
    dim: int = 0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.dim == 0:
            object.__setattr__(self, "dim", amps.size)
        if amps.ndim != 1 or amps.size != self.dim:
            raise InvalidDimensionError(
                f"amplitude vector of size {amps.size} does not match dim {self.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidParameterError(
                f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")

    @property
    def tail_population(self) -> float:
        """Population in the top 10% of basis indices."""
        k = int(0.9 * self.dim)
        return float(np.sum(np.abs(self.amplitudes[k:]) ** 2))

    def check_tail(self, tol: float = DEFAULT_LEAKAGE_TOL) -> None:
        t = self.tail_population
        if t > tol:
            raise TruncationFault(
                f"tail population {t:.3e} exceeds leakage tolerance {tol:.1e}")

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state: Hermitian, PSD, unit-trace matrix over the same basis."""

    elements: np.ndarray
    dim: int = 0

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=complex)
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)
        if self.dim == 0:
            object.__setattr__(self, "dim", el.shape[0])
        if el.ndim != 2 or el.shape != (self.dim, self.dim):
            raise InvalidDimensionError(f"density matrix shape {el.shape} invalid")
        if np.abs(el - el.conj().T).max() > HERM_TOL:
            raise InvalidParameterError("density matrix is not Hermitian")
        tr = np.trace(el).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidParameterError(f"trace {tr!r} deviates from 1")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.elements)[0])

    def validate_psd(self, tol: float = 1e-8) -> None:
        ev = self.min_eigenvalue()
        if ev < -tol:
            raise InvalidParameterError(f"minimum eigenvalue {ev:.3e} below -{tol:.0e}")

    @property
    def tail_population(self) -> float:
        k = int(0.9 * self.dim)
        return float(np.trace(self.elements[k:, k:]).real)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator in the Fock basis with an optional hermiticity hint."""

    elements: np.ndarray
    dim: int = 0
    hermitian_flag: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=complex)
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)
        if self.dim == 0:
            object.__setattr__(self, "dim", el.shape[0])
        if el.ndim != 2 or el.shape != (self.dim, self.dim):
            raise InvalidDimensionError(f"operator shape {el.shape} invalid")
        if self.hermitian_flag and np.abs(el - el.conj().T).max() > HERM_TOL:
            raise InvalidParameterError("hermitian_flag set on a non-Hermitian matrix")

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.elements.conj().T, self.dim, self.hermitian_flag)


def _as_array(obj) -> np.ndarray:
    if isinstance(obj, OperatorMatrix):
        return obj.elements
    return np.asarray(obj, dtype=complex)


def ladder_operators(dim: int) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Annihilation and creation operators, <n-1|a|n> = sqrt(n)."""
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    a = np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)
    return OperatorMatrix(a, dim), OperatorMatrix(a.conj().T, dim)


def number_operator(dim: int) -> OperatorMatrix:
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    return OperatorMatrix(np.diag(np.arange(dim)).astype(complex), dim,
                          hermitian_flag=True)


def expm_antihermitian(generator: np.ndarray) -> np.ndarray:
    """e^G for anti-Hermitian G via eigendecomposition of the Hermitian iG.

    Exact and unconditionally unitary, unlike Pade scaling-squaring on near-
    singular generators.
    """
    G = np.asarray(generator, dtype=complex)
    H = 1j * G
    if np.abs(H - H.conj().T).max() > 1e-9 * max(1.0, np.abs(H).max()):
        raise InvalidParameterError("generator is not anti-Hermitian")
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * w)) @ V.conj().T


def suggest_dim_coherent(beta: complex) -> int:
    """Basis size keeping tail leakage below ~1e-7 for coherent-state work."""
    b = abs(beta)
    return ceil(b * b + 6.0 * b + 20.0)


def suggest_dim_squeezed(xi: complex) -> int:
    """Basis size keeping tail leakage below ~1e-7 for squeezed-state work."""
    return ceil(4.0 * exp(2.0 * abs(xi)) + 20.0)


def displacement_operator(beta: complex, dim: int) -> OperatorMatrix:
    """Unitary D(beta) = exp(beta a† - beta* a) on the truncated basis.

    Warns when ``|beta|^2 + 6|beta| >= dim`` (displaced vacuum would reach the
    truncation edge).
    """
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    truncated = abs(beta) ** 2 + 6.0 * abs(beta) >= dim
    if truncated:
        warnings.warn(
            f"displacement beta={beta} close to cutoff dim={dim}; "
            f"suggest dim >= {suggest_dim_coherent(beta)}",
            TruncationWarning, stacklevel=2)
    a, ad = ladder_operators(dim)
    U = expm_antihermitian(beta * ad.elements - np.conj(beta) * a.elements)
    return OperatorMatrix(U, dim, meta={"truncation_warning": truncated})


def displacement_matrix(gamma: complex, dim: int) -> np.ndarray:
    """Exact infinite-space matrix elements <m|D(gamma)|n> for m, n < dim.

    Uses the closed form with associated Laguerre polynomials; unlike
    ``displacement_operator`` there is no truncation error in the returned
    block (it is simply not unitary as a dim x dim matrix).
    """
    x = abs(gamma) ** 2
    m = np.arange(dim)
    D = np.zeros((dim, dim), dtype=complex)
    for n in range(dim):
        k = m - n
        up = k >= 0
        lg = np.where(up,
                      0.5 * (gammaln(n + 1) - gammaln(m + 1)),
                      0.5 * (gammaln(m + 1) - gammaln(n + 1)))
        poly = np.where(up,
                        eval_genlaguerre(n, np.abs(k), x),
                        eval_genlaguerre(m, np.abs(k), x))
        amp = np.where(up,
                       gamma ** np.abs(k),
                       (-np.conj(gamma)) ** np.abs(k))
        D[:, n] = np.exp(lg - x / 2.0) * amp * poly
    return D


def squeeze_operator(xi: complex, dim: int) -> OperatorMatrix:
    """Unitary S(xi) = exp(xi*/2 a² - xi/2 a†²)."""
    if dim < 2:
        raise InvalidDimensionError(f"dim must be >= 2, got {dim}")
    # anti-squeezed tail must sit well inside the cutoff
    truncated = xi != 0 and 4.0 * np.exp(2 * abs(xi)) + 12.0 > dim
    if truncated:
        warnings.warn(
            f"squeeze xi={xi} close to cutoff dim={dim}; "
            f"suggest dim >= {suggest_dim_squeezed(xi)}",
            TruncationWarning, stacklevel=2)
    a, ad = ladder_operators(dim)
    a2 = a.elements @ a.elements
    G = 0.5 * np.conj(xi) * a2 - 0.5 * xi * a2.conj().T
    return OperatorMatrix(expm_antihermitian(G), dim,
                          meta={"truncation_warning": truncated})


def squeezed_vacuum_amplitudes(xi: complex, dim: int) -> np.ndarray:
    """Closed-form Fock amplitudes of S(xi)|0>, renormalized on the cutoff."""
    r, phi = abs(xi), np.angle(xi) if xi != 0 else 0.0
    c = np.zeros(dim, dtype=complex)
    c[0] = 1.0
    th = np.tanh(r)
    fac = 1.0 + 0j
    for m in range(1, (dim + 1) // 2):
        if 2 * m >= dim:
            break
        # c_{2m}/c_{2m-2} = -e^{i phi} tanh(r) sqrt((2m)(2m-1))/(2m)
        fac *= -np.exp(1j * phi) * th * np.sqrt((2 * m) * (2 * m - 1)) / (2 * m)
        c[2 * m] = fac
    c /= np.sqrt(np.cosh(r))
    return c / np.linalg.norm(c)


def fock_state(n: int, dim: int) -> QuantumState:
    if not 0 <= n < dim:
        raise InvalidParameterError(f"Fock index {n} outside basis of size {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return QuantumState(amps)


def coherent_state(beta: complex, dim: int) -> QuantumState:
    psi = displacement_operator(beta, dim).elements[:, 0]
    return QuantumState(psi / np.linalg.norm(psi))


def squeezed_fock_state(xi: complex, n: int, dim: int) -> QuantumState:
    if not 0 <= n < dim:
        raise InvalidParameterError(f"Fock index {n} outside basis of size {dim}")
    if n == 0:
        if xi != 0 and 4.0 * np.exp(2 * abs(xi)) + 12.0 > dim:
            warnings.warn(
                f"squeeze xi={xi} close to cutoff dim={dim}; "
                f"suggest dim >= {suggest_dim_squeezed(xi)}",
                TruncationWarning, stacklevel=2)
        return QuantumState(squeezed_vacuum_amplitudes(xi, dim))
    psi = squeeze_operator(xi, dim).elements[:, n]
    return QuantumState(psi / np.linalg.norm(psi))


def make_state(kind: str, dim: int, *, n: int = 0, beta: complex = 0.0,
               xi: complex = 0.0) -> QuantumState:
    """State factory: kind is one of ``vacuum|fock|coherent|squeezed_fock``."""
    if kind == "vacuum":
        return fock_state(0, dim)
    if kind == "fock":
        return fock_state(n, dim)
    if kind == "coherent":
        return coherent_state(beta, dim)
    if kind == "squeezed_fock":
        return squeezed_fock_state(xi, n, dim)
    raise InvalidParameterError(f"unknown state kind {kind!r}")


def apply_operator(op: OperatorMatrix, state: QuantumState,
                   renormalize: bool = True) -> QuantumState:
    if op.dim != state.dim:
        raise DimensionMismatchError(f"operator dim {op.dim} != state dim {state.dim}")
    psi = op.elements @ state.amplitudes
    if renormalize:
        psi = psi / np.linalg.norm(psi)
    return QuantumState(psi)


def expectation(op: OperatorMatrix | np.ndarray, state) -> complex:
    A = _as_array(op)
    if isinstance(state, QuantumState):
        return complex(np.vdot(state.amplitudes, A @ state.amplitudes))
    if isinstance(state, DensityMatrix):
        return complex(np.trace(A @ state.elements))
    psi = np.asarray(state, dtype=complex)
    return complex(np.vdot(psi, A @ psi))


def fidelity(state_a, state_b) -> float:
    """|<psi|phi>|^2, <psi|rho|psi> or Uhlmann fidelity, by argument types."""
    pa = isinstance(state_a, QuantumState)
    pb = isinstance(state_b, QuantumState)
    dim_a = state_a.dim
    dim_b = state_b.dim
    if dim_a != dim_b:
        raise DimensionMismatchError(f"dims differ: {dim_a} vs {dim_b}")
    if pa and pb:
        return float(abs(np.vdot(state_a.amplitudes, state_b.amplitudes)) ** 2)
    if pa and not pb:
        psi = state_a.amplitudes
        return float(np.real(psi.conj() @ (state_b.elements @ psi)))
    if pb and not pa:
        psi = state_b.amplitudes
        return float(np.real(psi.conj() @ (state_a.elements @ psi)))
    # mixed-mixed: (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
    wa, Va = np.linalg.eigh(state_a.elements)
    wa = np.clip(wa, 0.0, None)
    sq = (Va * np.sqrt(wa)) @ Va.conj().T
    inner = sq @ state_b.elements @ sq
    ev = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sum(np.sqrt(ev)) ** 2)
