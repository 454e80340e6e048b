"""Time evolution under piecewise-constant Hamiltonians.

Unitary segments use the exact eigendecomposition propagator (no integrator
error enters Trotter-order measurements).  Open-system evolution integrates
the Lindblad master equation with a classical fixed-step RK4, a spectral-span
stability cap on the step, and optional step-halving error control.
Eigendecompositions are cached on a content hash because protocol runs reuse
the same one or two matrices thousands of times.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegratorError, InvalidParameterError
from .fockcore import DensityMatrix, OperatorMatrix, QuantumState

__all__ = [
    "EvolutionResult",
    "evolve_unitary",
    "evolve_lindblad",
    "trajectory",
    "propagator",
    "hamiltonian_eig",
    "clear_eig_cache",
]

_EIG_CACHE: dict[bytes, tuple[np.ndarray, np.ndarray]] = {}
_EIG_LOCK = threading.Lock()
_EIG_CACHE_MAX = 64


def _content_key(H: np.ndarray) -> bytes:
    return hashlib.sha1(H.tobytes()).digest() + H.shape[0].to_bytes(4, "little")


def hamiltonian_eig(H: OperatorMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Cached eigendecomposition of a Hermitian operator."""
    if not H.hermitian_flag:
        dev = np.abs(H.elements - H.elements.conj().T).max()
        if dev > 1e-10 * max(1.0, np.abs(H.elements).max()):
            raise InvalidParameterError(
                f"Hamiltonian deviates from Hermitian by {dev:.2e}")
    key = _content_key(H.elements)
    with _EIG_LOCK:
        hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit
    w, V = np.linalg.eigh(H.elements)
    with _EIG_LOCK:
        if len(_EIG_CACHE) >= _EIG_CACHE_MAX:
            _EIG_CACHE.pop(next(iter(_EIG_CACHE)))
        _EIG_CACHE[key] = (w, V)
    return w, V


def clear_eig_cache() -> None:
    with _EIG_LOCK:
        _EIG_CACHE.clear()


def propagator(H: OperatorMatrix, t: float) -> np.ndarray:
    """exp(-i H t) as a dense matrix."""
    w, V = hamiltonian_eig(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def evolve_unitary(H: OperatorMatrix, t: float, psi: QuantumState) -> QuantumState:
    """exp(-i H t) |psi> via the eigendecomposition of H."""
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    if H.dim != psi.dim:
        raise InvalidParameterError(f"dims differ: H {H.dim}, psi {psi.dim}")
    w, V = hamiltonian_eig(H)
    out = V @ (np.exp(-1j * w * t) * (V.conj().T @ psi.amplitudes))
    return QuantumState(out / np.linalg.norm(out))


def _single_diagonal_offset(c: np.ndarray) -> int | None:
    """Offset k if c has support on exactly one diagonal, else None."""
    dim = c.shape[0]
    hits = [k for k in range(-dim + 1, dim)
            if np.any(np.abs(np.diag(c, k)) > 0)]
    if len(hits) == 1:
        return hits[0]
    return None


class _LindbladRHS:
    """d rho/dt = -i[H, rho] + sum_j 2pi k_j D[c_j] rho.

    Collapse operators supported on a single diagonal (the ladder operator,
    number operator, ...) are applied as shift-and-scale instead of matmul.
    """

    def __init__(self, H: np.ndarray, collapse: list[tuple[np.ndarray, float]]):
        self.H = H
        self.dense: list[tuple[float, np.ndarray, np.ndarray, np.ndarray]] = []
        self.banded: list[tuple[float, int, np.ndarray, np.ndarray]] = []
        for c, rate_mhz in collapse:
            if rate_mhz < 0:
                raise InvalidParameterError("collapse rates must be >= 0")
            if rate_mhz == 0:
                continue
            k_ang = 2.0 * np.pi * rate_mhz
            off = _single_diagonal_offset(c)
            if off is not None:
                diag = np.diag(c, off)
                # c^dagger c is diagonal with |diag|^2 at the source index
                cdc_diag = np.zeros(c.shape[0])
                if off >= 0:
                    cdc_diag[np.arange(diag.size) + off] = np.abs(diag) ** 2
                else:
                    cdc_diag[np.arange(diag.size)] = np.abs(diag) ** 2
                self.banded.append((k_ang, off, diag, cdc_diag))
            else:
                cd = c.conj().T
                self.dense.append((k_ang, c, cd, cd @ c))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.H @ rho - rho @ self.H)
        for k_ang, c, cd, cdc in self.dense:
            out += k_ang * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
        for k_ang, off, diag, cdc_diag in self.banded:
            m = diag.size
            if off >= 0:
                # (c rho c†)[i,j] = diag_i conj(diag_j) rho[i+off, j+off]
                block = rho[off:off + m, off:off + m]
                jump = diag[:, None] * np.conj(diag)[None, :] * block
                pad = np.zeros_like(rho)
                pad[:m, :m] = jump
            else:
                s = -off
                block = rho[:m, :m]
                jump = diag[:, None] * np.conj(diag)[None, :] * block
                pad = np.zeros_like(rho)
                pad[s:s + m, s:s + m] = jump
            out += k_ang * (pad - 0.5 * (cdc_diag[:, None] * rho
                                         + rho * cdc_diag[None, :]))
        return out


def _gershgorin_span(H: np.ndarray) -> float:
    radii = np.abs(H - np.diag(np.diag(H))).sum(axis=1)
    centers = np.diag(H).real
    return float((centers + radii).max() - (centers - radii).min())


def _rk4_run(rhs, rho: np.ndarray, t: float, dt: float) -> np.ndarray:
    n_steps = max(1, int(np.ceil(t / dt)))
    h = t / n_steps
    for _ in range(n_steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
    return rho


def evolve_lindblad(H: OperatorMatrix,
                    collapse: list[tuple[OperatorMatrix, float]],
                    t: float, rho: DensityMatrix,
                    dt_max: float = 0.002,
                    refine: bool = True,
                    fid_tol: float = 1e-7,
                    max_halvings: int = 6) -> DensityMatrix:
    """Integrate the master equation for time ``t`` (us); rates in MHz.

    The step is capped at 2.5/span(H) (RK4 stability on the stiff Kerr
    spectrum).  With ``refine`` the run is repeated at half step until the
    final-state fidelity moves by less than ``fid_tol``.
    """
    if dt_max <= 0:
        raise InvalidParameterError("dt_max must be positive")
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    if t == 0:
        return rho
    rhs = _LindbladRHS(H.elements, [(c.elements, r) for c, r in collapse])
    span = _gershgorin_span(H.elements)
    dt = min(dt_max, 2.5 / span if span > 0 else dt_max)
    out = _rk4_run(rhs, rho.elements.copy(), t, dt)
    if refine:
        from .fockcore import fidelity as _fid
        for _ in range(max_halvings):
            dt /= 2.0
            out2 = _rk4_run(rhs, rho.elements.copy(), t, dt)
            f = _fid(_normalized_dm(out), _normalized_dm(out2))
            if abs(1.0 - f) < fid_tol:
                out = out2
                break
            out = out2
        else:
            raise IntegratorError(
                f"step halving did not converge below {fid_tol} "
                f"(last dt = {dt:.2e}, span = {span:.1f} rad/us)")
    tr = np.trace(out).real
    return DensityMatrix(out / tr)


def _normalized_dm(mat: np.ndarray) -> DensityMatrix:
    mat = 0.5 * (mat + mat.conj().T)
    return DensityMatrix(mat / np.trace(mat).real)


@dataclass(frozen=True)
class EvolutionResult:
    """Final state plus sampled expectation values of named observables."""

    final_state: QuantumState | DensityMatrix
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    expectations: dict[str, np.ndarray] = field(default_factory=dict)
    leakage: np.ndarray = field(default_factory=lambda: np.empty(0))
    leakage_max: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise InvalidParameterError("sample times must be strictly increasing")


def trajectory(H_sequence: list[tuple[OperatorMatrix, float]],
               psi0: QuantumState, sample_dt: float,
               observables: dict[str, OperatorMatrix],
               leakage_tol: float = 1e-6) -> EvolutionResult:
    """Expectation time series on a uniform grid across H segments.

    ``H_sequence`` is a list of (Hamiltonian, duration_us) pairs; observables
    must be Hermitian.  Samples include t = 0 and every multiple of
    ``sample_dt`` up to the total duration.
    """
    if sample_dt <= 0:
        raise InvalidParameterError("sample_dt must be positive")
    for name, op in observables.items():
        dev = np.abs(op.elements - op.elements.conj().T).max()
        if dev > 1e-9 * max(1.0, np.abs(op.elements).max()):
            raise InvalidParameterError(f"observable {name!r} is not Hermitian")

    total = sum(d for _, d in H_sequence)
    n_samp = int(np.floor(total / sample_dt + 1e-9)) + 1
    times = np.arange(n_samp) * sample_dt
    values = {name: np.empty(n_samp) for name in observables}
    leak = np.zeros(n_samp)

    psi = psi0
    seg_start = 0.0
    i_samp = 0
    for H, dur in H_sequence:
        w, V = hamiltonian_eig(H)
        coeff = V.conj().T @ psi.amplitudes
        seg_end = seg_start + dur
        while i_samp < n_samp and times[i_samp] <= seg_end + 1e-12:
            tau = times[i_samp] - seg_start
            amp = V @ (np.exp(-1j * w * tau) * coeff)
            st = QuantumState(amp / np.linalg.norm(amp))
            leak[i_samp] = st.tail_population
            for name, op in observables.items():
                values[name][i_samp] = np.real(
                    np.vdot(st.amplitudes, op.elements @ st.amplitudes))
            i_samp += 1
        amp = V @ (np.exp(-1j * w * dur) * coeff)
        psi = QuantumState(amp / np.linalg.norm(amp))
        seg_start = seg_end
    return EvolutionResult(final_state=psi, times=times, expectations=values,
                           leakage=leak, leakage_max=float(leak.max(initial=0.0)))
