"""Hamiltonian builders for the driven Kerr oscillator family.

All user-facing frequencies are ordinary frequencies in MHz (the value of
omega/2pi); times are in microseconds.  Internally every Hamiltonian carries
the 2 pi factor, i.e. matrices are in rad/us, so that ``evolve_unitary(H, t)``
with t in us applies exp(-i H t) directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError
from .fockcore import OperatorMatrix, ladder_operators

__all__ = [
    "TWO_PI",
    "OscillatorParams",
    "DriveParams",
    "FrameParams",
    "JcParams",
    "build_driven_kerr",
    "build_displaced_kerr",
    "build_kpo",
    "build_jc",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class OscillatorParams:
    """Kerr oscillator constants, ordinary frequencies in MHz.

    kerr: first-order Kerr strength K (positive in all paper scenarios).
    kerr2, kerr3: second/third-order Kerr corrections (order 1e-6 MHz, i.e.
    a few Hz, when used; default 0).
    kappa: single-photon decay rate.
    """

    kerr: float
    kerr2: float = 0.0
    kerr3: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        # K > 0 in every paper scenario; K = 0 stays admissible as the
        # analytic limit exercised by the protocol identities
        if self.kerr < 0:
            raise InvalidParameterError("kerr must be >= 0")
        if self.kappa < 0:
            raise InvalidParameterError("kappa must be >= 0")
        for v in (self.kerr, self.kerr2, self.kerr3, self.kappa):
            if not np.isfinite(v):
                raise InvalidParameterError("oscillator parameters must be finite")


@dataclass(frozen=True)
class DriveParams:
    """Off-resonant drive: detuning_mhz = (omega_c - omega_d)/2pi, amplitude,
    and phase (normalized into [0, 2pi))."""

    detuning: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.detuning) and np.isfinite(self.amplitude)
                and np.isfinite(self.phase)):
            raise InvalidParameterError("drive parameters must be finite")
        object.__setattr__(self, "phase", float(self.phase) % TWO_PI)


@dataclass(frozen=True)
class FrameParams:
    """Complex displacement of the co-moving frame."""

    beta: complex

    def __post_init__(self):
        if not np.isfinite(self.beta.real) or not np.isfinite(self.beta.imag):
            raise InvalidParameterError("beta must be finite")

    def check_budget(self, dim: int) -> None:
        if abs(self.beta) ** 2 >= dim:
            raise InvalidParameterError(
                f"|beta|^2 = {abs(self.beta)**2:.1f} outside cutoff budget {dim}")


@dataclass(frozen=True)
class JcParams:
    """Jaynes-Cummings model of the cavity-transmon pair (MHz)."""

    cavity_freq: float
    qubit_freq: float
    anharmonicity: float
    coupling: float
    qubit_levels: int = 2

    def __post_init__(self):
        if self.qubit_levels < 2:
            raise InvalidParameterError("qubit_levels must be >= 2")
        if self.coupling < 0:
            raise InvalidParameterError("coupling must be >= 0")


def _kerr_diagonal(osc: OscillatorParams, dim: int) -> np.ndarray:
    """Diagonal of -(K/2)a†²a² - (K2/6)a†³a³ - (K3/24)a†⁴a⁴ (MHz)."""
    n = np.arange(dim, dtype=float)
    d = -(osc.kerr / 2.0) * n * (n - 1)
    if osc.kerr2:
        d = d - (osc.kerr2 / 6.0) * n * (n - 1) * (n - 2)
    if osc.kerr3:
        d = d - (osc.kerr3 / 24.0) * n * (n - 1) * (n - 2) * (n - 3)
    return d


def build_driven_kerr(osc: OscillatorParams, drive: DriveParams,
                      dim: int) -> OperatorMatrix:
    """H_d = 2pi [Delta n - K/2 a†²a² - ... + Omega (e^{i phi} a + h.c.)]."""
    a, _ = ladder_operators(dim)
    H = np.diag(drive.detuning * np.arange(dim) + _kerr_diagonal(osc, dim)
                ).astype(complex)
    if drive.amplitude:
        H += drive.amplitude * (np.exp(1j * drive.phase) * a.elements
                                + np.exp(-1j * drive.phase) * a.elements.conj().T)
    return OperatorMatrix(TWO_PI * H, dim, hermitian_flag=True,
                          meta={"kind": "driven_kerr"})


def _displaced_higher_kerr(coef: float, order: int, beta: complex,
                           dim: int) -> np.ndarray:
    """Normal-ordered expansion of coef * (a†+b*)^m (a+b)^m minus its scalar."""
    a, _ = ladder_operators(dim)
    apow = [np.eye(dim, dtype=complex)]
    for _ in range(order):
        apow.append(apow[-1] @ a.elements)
    H = np.zeros((dim, dim), dtype=complex)
    for j in range(order + 1):
        for k in range(order + 1):
            if j == 0 and k == 0:
                continue  # identity term dropped with the frame constant
            c = (comb(order, j) * comb(order, k)
                 * np.conj(beta) ** (order - j) * beta ** (order - k))
            H += (coef * c) * (apow[j].conj().T @ apow[k])
    return H


def build_displaced_kerr(osc: OscillatorParams, drive: DriveParams,
                         frame: FrameParams, dim: int) -> OperatorMatrix:
    """Driven Kerr Hamiltonian conjugated into the frame displaced by beta.

    Assembled term by term in normal order, which is exactly the truncation
    of the infinite-space operator (the frame constant is dropped):

        H_b = 2pi [ Delta' n - K/2 a†²a² - K/2 (b² a†² + b*² a²)
                    - K (b a†²a + b* a†a²) + lam a† + lam* a + ... ]

    with Delta' = Delta - 2K|b|² and lam = Delta b + Omega e^{-i phi} - K|b|² b.
    The photon-blockade parameter r = Delta/K + Omega e^{-i phi}/(K b) - |b|²
    (lam = K b r) is reported in ``meta["r"]``; it is undefined for b = 0.
    Higher-order Kerr terms, when configured, are expanded the same way.
    """
    beta = complex(frame.beta)
    frame.check_budget(dim)
    if beta == 0:
        H = build_driven_kerr(osc, drive, dim)
        return OperatorMatrix(H.elements, dim, hermitian_flag=True,
                              meta={"kind": "displaced_kerr", "r": None,
                                    "delta_prime": drive.detuning})
    a, _ = ladder_operators(dim)
    aa = a.elements @ a.elements
    n = np.arange(dim, dtype=float)
    K = osc.kerr
    delta_prime = drive.detuning - 2.0 * K * abs(beta) ** 2
    H = np.diag(delta_prime * n - (K / 2.0) * n * (n - 1)).astype(complex)
    two_photon = -(K / 2.0) * beta ** 2 * aa.conj().T
    blockade_cubic = -K * beta * (aa.conj().T @ a.elements)
    lam = (drive.detuning * beta
           + drive.amplitude * np.exp(-1j * drive.phase)
           - K * abs(beta) ** 2 * beta)
    linear = lam * a.elements.conj().T
    half = two_photon + blockade_cubic + linear
    H += half + half.conj().T
    if osc.kerr2:
        H += _displaced_higher_kerr(-osc.kerr2 / 6.0, 3, beta, dim)
    if osc.kerr3:
        H += _displaced_higher_kerr(-osc.kerr3 / 24.0, 4, beta, dim)
    if K > 0:
        r = drive.detuning / K \
            + drive.amplitude * np.exp(-1j * drive.phase) / (K * beta) \
            - abs(beta) ** 2
    else:
        r = None  # no blockade term without Kerr
    return OperatorMatrix(TWO_PI * H, dim, hermitian_flag=True,
                          meta={"kind": "displaced_kerr", "r": r,
                                "delta_prime": delta_prime})


def build_kpo(osc: OscillatorParams, frame: FrameParams, delta_prime: float,
              dim: int) -> OperatorMatrix:
    """Kerr parametric oscillator: detuning, Kerr and two-photon terms.

        H_KPO = 2pi [ Delta' n - K/2 a†²a² - K/2 (b² a†² + b*² a²) ]

    Equals (H_b + H_-b)/2 exactly when those are built with Omega = 0 and
    Delta = Delta' + 2K|b|².  Configured higher-order Kerr enters as its bare
    diagonal only (the displaced cross terms do not cancel pairwise and are
    not part of this model).
    """
    beta = complex(frame.beta)
    a, _ = ladder_operators(dim)
    aa = a.elements @ a.elements
    n = np.arange(dim, dtype=float)
    H = np.diag(delta_prime * n + _kerr_diagonal(osc, dim)).astype(complex)
    tp = -(osc.kerr / 2.0) * beta ** 2 * aa.conj().T
    H += tp + tp.conj().T
    return OperatorMatrix(TWO_PI * H, dim, hermitian_flag=True,
                          meta={"kind": "kpo", "delta_prime": delta_prime})


def build_jc(jc: JcParams, cavity_dim: int) -> OperatorMatrix:
    """Two-mode Jaynes-Cummings Hamiltonian on cavity (x) qubit, rad/us.

    Index convention: |n_c, n_q> at row n_c * qubit_levels + n_q.
    """
    total = cavity_dim * jc.qubit_levels
    if total > 2000:
        raise InvalidDimensionError(
            f"tensor dimension {total} exceeds the 2000 budget")
    ac, _ = ladder_operators(cavity_dim)
    aq, _ = ladder_operators(jc.qubit_levels)
    Ic = np.eye(cavity_dim)
    Iq = np.eye(jc.qubit_levels)
    nc = np.kron(np.diag(np.arange(cavity_dim)), Iq)
    nq = np.kron(Ic, np.diag(np.arange(jc.qubit_levels)))
    mq = np.arange(jc.qubit_levels, dtype=float)
    anh = np.kron(Ic, np.diag(mq * (mq - 1)))
    H = (jc.cavity_freq * nc + jc.qubit_freq * nq
         - (jc.anharmonicity / 2.0) * anh).astype(complex)
    H += jc.coupling * (np.kron(ac.elements.conj().T, aq.elements)
                        + np.kron(ac.elements, aq.elements.conj().T))
    return OperatorMatrix(TWO_PI * H, total, hermitian_flag=True,
                          meta={"kind": "jaynes_cummings",
                                "cavity_dim": cavity_dim,
                                "qubit_levels": jc.qubit_levels})
