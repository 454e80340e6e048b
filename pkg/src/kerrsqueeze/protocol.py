"""Experiment sequences: cyclic squeezing and Trotterized amplification.

The cyclic protocol displaces into a co-moving frame, evolves under the
detuned driven Kerr Hamiltonian, closes the frame and optionally applies a
calibrated virtual rotation; snapshots are taken at the end of every cycle.
The Trotter protocol alternates the displaced frame between +beta and -beta
so the photon-blockade term averages away and the two-photon squeezing term
survives.

Frame-change displacements may carry a finite pulse duration.  A pulse of
duration tau is modeled as D(gamma/2) U0(tau) D(gamma/2): the free Kerr
evolution acts at the mid-pulse frame, which reproduces the squeezing-rate
deficit of short Trotter steps (no squeezing is generated while the state
sits between the two frames).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._wigner import wigner_values
from .errors import DegeneratePhaseError, InvalidParameterError, TruncationFault
from .evolve import hamiltonian_eig, propagator
from .fockcore import (
    OperatorMatrix,
    QuantumState,
    DensityMatrix,
    displacement_operator,
    ladder_operators,
)
from .hamiltonian import (
    DriveParams,
    FrameParams,
    OscillatorParams,
    build_displaced_kerr,
    build_driven_kerr,
)

__all__ = [
    "Displace",
    "Evolve",
    "VirtualRotate",
    "ProtocolSchedule",
    "TrotterConfig",
    "CyclicResult",
    "TrotterResult",
    "run_schedule",
    "build_cyclic_schedule",
    "build_trotter_schedule",
    "run_cyclic_squeeze",
    "run_trotter_squeeze",
    "apply_virtual_rotation",
    "calibrate_phase",
]

DEFAULT_LEAKAGE_TOL = 1e-6


@dataclass(frozen=True)
class Displace:
    beta: complex
    duration: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise InvalidParameterError("displacement duration must be >= 0")


@dataclass(frozen=True)
class Evolve:
    hamiltonian_id: str
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise InvalidParameterError("evolution time must be >= 0")


@dataclass(frozen=True)
class VirtualRotate:
    theta: float


@dataclass(frozen=True)
class ProtocolSchedule:
    """Ordered list of segments plus the frame displacement after each one."""

    segments: tuple

    @property
    def frame_log(self) -> list[complex]:
        log = []
        frame = 0.0 + 0.0j
        for seg in self.segments:
            if isinstance(seg, Displace):
                frame = frame + seg.beta
            elif isinstance(seg, VirtualRotate):
                frame = frame * np.exp(-1j * seg.theta)
            log.append(frame)
        return log

    @property
    def net_frame(self) -> complex:
        log = self.frame_log
        return log[-1] if log else 0.0 + 0.0j


@dataclass(frozen=True)
class TrotterConfig:
    """Trotterized squeezing-amplification settings.

    delta_t is the full Trotter step (the state spends delta_t/2 in each
    frame per first-order step); detuning is the drive-frame detuning used in
    both displaced Hamiltonians; displacement_duration > 0 switches the
    frame changes to the finite-pulse model.
    """

    beta: complex
    delta_t: float
    steps: int
    order: int = 1
    detuning: float = 0.0
    displacement_duration: float = 0.0

    def __post_init__(self):
        if self.steps < 0:
            raise InvalidParameterError("steps must be >= 0")
        if self.delta_t <= 0:
            raise InvalidParameterError("delta_t must be positive")
        if self.order not in (1, 2):
            raise InvalidParameterError(f"order must be 1 or 2, got {self.order}")
        if self.order == 2 and self.steps % 2:
            raise InvalidParameterError("second-order runs need an even step count")
        if self.displacement_duration < 0:
            raise InvalidParameterError("displacement_duration must be >= 0")


@dataclass(frozen=True)
class CyclicResult:
    final_state: QuantumState | DensityMatrix
    snapshots: tuple
    cycle_times: tuple
    rotations: tuple
    leakage_max: float


@dataclass(frozen=True)
class TrotterResult:
    final_state: QuantumState
    snapshots: tuple
    step_times: tuple
    leakage_max: float


def apply_virtual_rotation(state: QuantumState, theta: float) -> QuantumState:
    """Rotate the frame: a -> a e^{-i theta} (amplitude n picks up e^{-i n theta})."""
    n = np.arange(state.dim)
    return QuantumState(state.amplitudes * np.exp(-1j * theta * n))


def calibrate_phase(state, ring_radius: float = 0.7, n_angles: int = 72) -> float:
    """Orientation of the squeezed state from a Wigner ring scan.

    Scans W(|alpha| e^{i theta}) on the circle of radius ``ring_radius``,
    locates the maximum (the anti-squeezed axis) with parabolic refinement
    and maps it to the rotation angle that aligns the squeezed axis with x.
    A rotationally symmetric state has no contrast on the ring and raises
    ``DegeneratePhaseError``.
    """
    if n_angles < 8:
        raise InvalidParameterError("n_angles must be >= 8")
    if isinstance(state, QuantumState):
        rho = np.outer(state.amplitudes, state.amplitudes.conj())
    elif isinstance(state, DensityMatrix):
        rho = state.elements
    else:
        rho = np.asarray(state, dtype=complex)
    th = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    w = wigner_values(rho, ring_radius * np.exp(1j * th))
    if w.max() - w.min() < 1e-3:
        raise DegeneratePhaseError(
            f"ring contrast {w.max() - w.min():.2e} below 1e-3")
    j = int(np.argmax(w))
    y1, y2, y3 = w[(j - 1) % n_angles], w[j], w[(j + 1) % n_angles]
    denom = y1 - 2.0 * y2 + y3
    shift = 0.5 * (y1 - y3) / denom if denom != 0 else 0.0
    t_max = th[j] + shift * (th[1] - th[0])
    # ring maximum sits a quarter turn from the squeezed axis
    theta = (t_max - np.pi / 2.0) % np.pi
    if theta >= np.pi / 2.0:
        theta -= np.pi
    return float(theta)


def build_cyclic_schedule(beta: complex, total_time: float,
                          rotation: float = 0.0,
                          displacement_duration: float = 0.0) -> ProtocolSchedule:
    return ProtocolSchedule(segments=(
        Displace(beta, displacement_duration),
        Evolve("drive", total_time),
        Displace(-beta, displacement_duration),
        VirtualRotate(rotation),
    ))


def build_trotter_schedule(cfg: TrotterConfig) -> ProtocolSchedule:
    """Lab-frame segment list of the alternating-frame sequence.

    First order per step: half evolution in frame +beta, half in -beta,
    realized by D(beta) ... D(-2 beta) ... D(2 beta) ... displacements.
    Second order groups steps in symmetric pairs.
    """
    tau = cfg.displacement_duration
    b = cfg.beta
    if cfg.steps == 0:
        return ProtocolSchedule(segments=())
    segs: list = [Displace(b, tau)]
    if cfg.order == 1:
        for k in range(cfg.steps):
            segs.append(Evolve("kerr", cfg.delta_t / 2.0))
            segs.append(Displace(-2 * b, tau))
            segs.append(Evolve("kerr", cfg.delta_t / 2.0))
            segs.append(Displace(2 * b, tau) if k < cfg.steps - 1
                        else Displace(b, tau))
    else:
        # adjacent pairs share the +beta frame: the boundary D(beta) D(-beta)
        # of consecutive symmetric groups cancels, so no swap in between
        pairs = cfg.steps // 2
        for k in range(pairs):
            segs.append(Evolve("kerr", cfg.delta_t / 2.0))
            segs.append(Displace(-2 * b, tau))
            segs.append(Evolve("kerr", cfg.delta_t))
            segs.append(Displace(2 * b, tau))
            segs.append(Evolve("kerr", cfg.delta_t / 2.0))
        segs.append(Displace(-b, tau))
    sched = ProtocolSchedule(segments=tuple(segs))
    if abs(sched.net_frame) > 1e-12:
        raise InvalidParameterError("trotter schedule does not close the frame")
    return sched


def run_schedule(schedule: ProtocolSchedule,
                 hamiltonians: dict[str, OperatorMatrix],
                 psi0: QuantumState,
                 leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> QuantumState:
    """Execute a schedule segment by segment (reference implementation)."""
    psi = psi0
    leakage = 0.0
    dim = psi.dim
    for seg in schedule.segments:
        if isinstance(seg, Displace):
            psi = _apply_displacement(seg, hamiltonians, psi, dim)
        elif isinstance(seg, Evolve):
            H = hamiltonians[seg.hamiltonian_id]
            w, V = hamiltonian_eig(H)
            amp = V @ (np.exp(-1j * w * seg.t) * (V.conj().T @ psi.amplitudes))
            psi = QuantumState(amp / np.linalg.norm(amp))
        elif isinstance(seg, VirtualRotate):
            psi = apply_virtual_rotation(psi, seg.theta)
        else:
            raise InvalidParameterError(f"unknown segment {seg!r}")
        leakage = max(leakage, psi.tail_population)
    if leakage > leakage_tol:
        raise TruncationFault(
            f"leakage {leakage:.2e} above tolerance {leakage_tol:.0e}")
    return psi


def _apply_displacement(seg: Displace, hamiltonians, psi: QuantumState,
                        dim: int) -> QuantumState:
    if seg.duration == 0.0:
        D = displacement_operator(seg.beta, dim)
        return QuantumState(D.elements @ psi.amplitudes)
    H0 = hamiltonians["kerr"]
    w, V = hamiltonian_eig(H0)
    Dh = displacement_operator(seg.beta / 2.0, dim)
    amp = Dh.elements @ psi.amplitudes
    amp = V @ (np.exp(-1j * w * seg.duration) * (V.conj().T @ amp))
    amp = Dh.elements @ amp
    return QuantumState(amp / np.linalg.norm(amp))


def _refined_cycle_ends(w, V, Dm, c0, cycle_period, cycles, parity,
                        window_frac=0.05, n_scan=51):
    """Per-cycle times maximizing the closed-frame |<Pi>| (the |W(0)| revival;
    odd-Fock inputs revive with negative parity), scanned in a window around
    multiples of the nominal period."""
    ends = []
    for k in range(1, cycles + 1):
        half = window_frac * cycle_period
        tt = np.linspace(k * cycle_period - half, k * cycle_period + half, n_scan)
        pv = np.empty(tt.size)
        for i, t in enumerate(tt):
            amp = Dm @ (V @ (np.exp(-1j * w * t) * c0))
            pv[i] = abs(float(np.sum(parity * np.abs(amp) ** 2)))
        j = int(np.argmax(pv))
        if 0 < j < tt.size - 1:
            y1, y2, y3 = pv[j - 1], pv[j], pv[j + 1]
            d = y1 - 2 * y2 + y3
            t_best = tt[j] + (0.5 * (y1 - y3) / d if d != 0 else 0.0) * (tt[1] - tt[0])
        else:
            t_best = tt[j]
        ends.append(float(t_best))
    return ends


def run_cyclic_squeeze(osc: OscillatorParams, drive: DriveParams, beta: complex,
                       cycles: int, cycle_period: float, psi0: QuantumState,
                       refine_ends: bool = True,
                       rotation: str = "calibrated",
                       lindblad: bool = False,
                       dt_max: float = 0.002,
                       leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> CyclicResult:
    """Cyclic squeezing run: D(beta), drive-Kerr evolution, D(-beta) per cycle.

    The evolution is one continuous run under the driven Kerr Hamiltonian;
    the frame is closed on a copy at each cycle end to produce the snapshot.
    With ``refine_ends`` the nominal k * cycle_period times are refined to
    the local maximum of the closed-frame parity, which is how the cycle
    period is located experimentally (the W(0) revival).  ``rotation`` is
    "calibrated" (ring-scan virtual rotation per snapshot), "none", or a
    fixed angle in radians passed as a float.

    With ``lindblad`` the state is propagated as a density matrix with
    single-photon loss at ``osc.kappa``; cycle-end times are still refined
    on the closed-system trajectory.
    """
    if cycles < 0:
        raise InvalidParameterError("cycles must be >= 0")
    if cycle_period <= 0:
        raise InvalidParameterError("cycle_period must be positive")
    dim = psi0.dim
    H = build_driven_kerr(osc, drive, dim)
    D = displacement_operator(beta, dim)
    Dm = displacement_operator(-beta, dim)
    if cycles == 0:
        return CyclicResult(psi0, (), (), (), psi0.tail_population)

    w, V = hamiltonian_eig(H)
    psi_d = D.elements @ psi0.amplitudes
    c0 = V.conj().T @ psi_d
    parity = (-1.0) ** np.arange(dim)
    if refine_ends:
        ends = _refined_cycle_ends(w, V, Dm.elements, c0, cycle_period,
                                   cycles, parity)
    else:
        ends = [k * cycle_period for k in range(1, cycles + 1)]

    snapshots = []
    rotations = []
    leakage = 0.0

    def _snapshot(closed_state):
        if rotation == "calibrated":
            try:
                theta = calibrate_phase(closed_state)
            except DegeneratePhaseError:
                theta = 0.0
        elif rotation == "none":
            theta = 0.0
        else:
            theta = float(rotation)
        rotations.append(theta)
        if isinstance(closed_state, QuantumState):
            return apply_virtual_rotation(closed_state, theta)
        n = np.arange(dim)
        ph = np.exp(-1j * theta * n)
        return DensityMatrix(ph[:, None] * closed_state.elements
                             * ph.conj()[None, :])

    if not lindblad:
        for t in ends:
            amp = V @ (np.exp(-1j * w * t) * c0)
            st = QuantumState(amp / np.linalg.norm(amp))
            leakage = max(leakage, st.tail_population)
            closed = QuantumState(Dm.elements @ st.amplitudes)
            snapshots.append(_snapshot(closed))
    else:
        from .evolve import evolve_lindblad
        a, _ = ladder_operators(dim)
        rho = DensityMatrix(np.outer(psi_d, psi_d.conj()))
        t_prev = 0.0
        for t in ends:
            rho = evolve_lindblad(H, [(a, osc.kappa)], t - t_prev, rho,
                                  dt_max=dt_max, refine=False)
            t_prev = t
            leakage = max(leakage, rho.tail_population)
            closed = DensityMatrix(Dm.elements @ rho.elements
                                   @ Dm.elements.conj().T)
            snapshots.append(_snapshot(closed))
    if leakage > leakage_tol:
        raise TruncationFault(
            f"leakage {leakage:.2e} above tolerance {leakage_tol:.0e}")
    return CyclicResult(final_state=snapshots[-1], snapshots=tuple(snapshots),
                        cycle_times=tuple(ends), rotations=tuple(rotations),
                        leakage_max=leakage)


def run_trotter_squeeze(osc: OscillatorParams, cfg: TrotterConfig,
                        psi0: QuantumState,
                        leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> TrotterResult:
    """Trotterized squeezing amplification with Omega_d = 0 during evolution.

    With instantaneous displacements the run is carried out directly in the
    displaced frame, alternating exact propagators of H_{+beta} and
    H_{-beta}; per-step snapshots are already frame-closed.  With a finite
    displacement duration the run uses the lab-frame sequence with the
    mid-pulse Kerr model, and each snapshot closes the frame with a pulsed
    displacement as in the experiment.
    """
    dim = psi0.dim
    if cfg.steps == 0:
        return TrotterResult(psi0, (), (), psi0.tail_population)
    drive0 = DriveParams(detuning=cfg.detuning, amplitude=0.0)
    if cfg.displacement_duration == 0.0:
        Hb = build_displaced_kerr(osc, drive0, FrameParams(cfg.beta), dim)
        Hm = build_displaced_kerr(osc, drive0, FrameParams(-cfg.beta), dim)
        psi = psi0.amplitudes.copy()
        snaps, times = [], []
        leakage = 0.0
        if cfg.order == 1:
            Ub = propagator(Hb, cfg.delta_t / 2.0)
            Um = propagator(Hm, cfg.delta_t / 2.0)
            for k in range(cfg.steps):
                psi = Um @ (Ub @ psi)
                st = QuantumState(psi / np.linalg.norm(psi))
                leakage = max(leakage, st.tail_population)
                snaps.append(st)
                times.append((k + 1) * cfg.delta_t)
        else:
            Ub = propagator(Hb, cfg.delta_t / 2.0)
            Um = propagator(Hm, cfg.delta_t)
            for k in range(cfg.steps // 2):
                psi = Ub @ (Um @ (Ub @ psi))
                st = QuantumState(psi / np.linalg.norm(psi))
                leakage = max(leakage, st.tail_population)
                snaps.append(st)
                times.append((k + 1) * 2 * cfg.delta_t)
    else:
        snaps, times, leakage = _run_trotter_pulsed(osc, cfg, psi0)
    if leakage > leakage_tol:
        raise TruncationFault(
            f"leakage {leakage:.2e} above tolerance {leakage_tol:.0e}")
    return TrotterResult(final_state=snaps[-1], snapshots=tuple(snaps),
                         step_times=tuple(times), leakage_max=leakage)


def _run_trotter_pulsed(osc: OscillatorParams, cfg: TrotterConfig,
                        psi0: QuantumState):
    """Lab-frame Trotter run with finite-duration displacement pulses."""
    dim = psi0.dim
    drive0 = DriveParams(detuning=cfg.detuning, amplitude=0.0)
    H0 = build_driven_kerr(osc, drive0, dim)
    phases = np.diag(H0.elements).real  # undriven Hamiltonian is diagonal
    tau = cfg.displacement_duration
    b = cfg.beta

    def u0(amp, t):
        return np.exp(-1j * phases * t) * amp

    pulse_cache: dict[complex, np.ndarray] = {}

    def pulse(amp, gamma):
        Dh = pulse_cache.get(gamma)
        if Dh is None:
            Dh = displacement_operator(gamma / 2.0, dim).elements
            pulse_cache[gamma] = Dh
        out = Dh @ amp
        out = u0(out, tau)
        return Dh @ out

    psi = pulse(psi0.amplitudes.copy(), b)
    snaps, times = [], []
    leakage = psi0.tail_population
    wall = tau
    if cfg.order == 1:
        for k in range(cfg.steps):
            psi = u0(psi, cfg.delta_t / 2.0)
            psi = pulse(psi, -2 * b)
            psi = u0(psi, cfg.delta_t / 2.0)
            wall += cfg.delta_t + tau
            snap = pulse(psi.copy(), b)
            st = QuantumState(snap / np.linalg.norm(snap))
            leakage = max(leakage, st.tail_population,
                          float(np.sum(np.abs(psi[int(0.9 * dim):]) ** 2)))
            snaps.append(st)
            times.append(wall + tau)
            if k < cfg.steps - 1:
                psi = pulse(psi, 2 * b)
                wall += tau
    else:
        # consecutive symmetric pairs stay in the +beta frame (the boundary
        # D(beta) D(-beta) cancels), so pairs follow each other directly
        for k in range(cfg.steps // 2):
            psi = u0(psi, cfg.delta_t / 2.0)
            psi = pulse(psi, -2 * b)
            psi = u0(psi, cfg.delta_t)
            psi = pulse(psi, 2 * b)
            psi = u0(psi, cfg.delta_t / 2.0)
            wall += 2 * cfg.delta_t + 2 * tau
            snap = pulse(psi.copy(), -b)
            st = QuantumState(snap / np.linalg.norm(snap))
            leakage = max(leakage, st.tail_population)
            snaps.append(st)
            times.append(wall + tau)
    return snaps, times, leakage
