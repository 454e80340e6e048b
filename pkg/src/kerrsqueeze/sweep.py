"""Parameter sweeps over the cyclic and Trotter protocols.

Every scan maps a parameter grid over an embarrassingly parallel worker pool
and gathers per-point records.  Records carry the full parameter tuple, a
status, and metrics only when the point succeeded; tables are canonically
ordered before persistence so reruns are byte-identical regardless of worker
count.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    best_fit_squeezed_vacuum,
    fit_1d_cuts,
    min_variance_xi,
    squeezing_level_db,
    wigner_point_values,
)
from .errors import (
    AperiodicTraceError,
    DegeneratePhaseError,
    FitFailureError,
    InvalidDimensionError,
    InvalidParameterError,
    KerrSqueezeError,
    TruncationFault,
)
from .evolve import evolve_unitary, trajectory
from .fockcore import (
    QuantumState,
    displacement_operator,
    fock_state,
    ladder_operators,
    number_operator,
    suggest_dim_coherent,
)
from .hamiltonian import (
    TWO_PI,
    DriveParams,
    FrameParams,
    JcParams,
    OscillatorParams,
    build_driven_kerr,
    build_jc,
    build_kpo,
)
from .protocol import (
    TrotterConfig,
    apply_virtual_rotation,
    calibrate_phase,
    run_cyclic_squeeze,
    run_trotter_squeeze,
)

__all__ = [
    "SweepRecord",
    "run_grid",
    "extract_period",
    "scan_drive_params",
    "scan_decay",
    "scan_trotter_dt",
    "optimize_detuning",
    "scan_qubit_excitation",
    "squeeze_level_from_cuts",
    "write_table",
    "read_table",
]

STATUS_OK = "ok"
STATUS_TRUNCATION = "truncation-fault"
STATUS_FIT = "fit-failure"


@dataclass(frozen=True)
class SweepRecord:
    params: dict[str, float]
    metrics: dict[str, float] = field(default_factory=dict)
    status: str = STATUS_OK

    def key(self) -> tuple:
        return tuple(self.params[k] for k in sorted(self.params))


def _classify(exc: Exception) -> str:
    if isinstance(exc, TruncationFault):
        return STATUS_TRUNCATION
    if isinstance(exc, (FitFailureError, DegeneratePhaseError,
                        AperiodicTraceError)):
        return STATUS_FIT
    raise exc


def _run_point(args):
    fn, params, kwargs = args
    try:
        metrics = fn(params, **kwargs)
        return SweepRecord(params=params, metrics=metrics, status=STATUS_OK)
    except KerrSqueezeError as exc:
        return SweepRecord(params=params, metrics={}, status=_classify(exc))


def run_grid(points: list[dict[str, float]], job, workers: int = 1,
             **kwargs) -> list[SweepRecord]:
    """Evaluate ``job(params, **kwargs)`` per grid point, canonically sorted.

    ``job`` must be a module-level function (the pool pickles it).  Results
    are sorted by the parameter tuple, so the output is independent of the
    worker count and completion order.
    """
    tasks = [(job, p, kwargs) for p in points]
    if workers <= 1:
        records = [_run_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_point, tasks))
    records.sort(key=lambda r: r.key())
    keys = [r.key() for r in records]
    if len(set(keys)) != len(keys):
        raise InvalidParameterError("sweep grid contains duplicate parameter tuples")
    return records


def extract_period(times: np.ndarray, values: np.ndarray) -> float:
    """Oscillation period from the autocorrelation of the detrended trace.

    The first local minimum of the autocorrelation bounds the search; the
    dominant peak beyond it is refined by parabolic interpolation.  A trace
    without a secondary peak (undriven or aperiodic dynamics) raises
    ``AperiodicTraceError``.
    """
    t = np.asarray(times, float)
    y = np.asarray(values, float)
    if t.size != y.size or t.size < 8:
        raise InvalidParameterError("trace too short for period extraction")
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-6):
        raise InvalidParameterError("trace must be uniformly sampled")
    n = y.size
    w = np.hanning(n)
    mu = float(np.sum(w * y) / np.sum(w))
    yd = w * (y - mu)
    if np.abs(yd).max() < 1e-12:
        raise AperiodicTraceError("trace is constant")
    # Hann-weighted, envelope-normalized autocorrelation: plain overlap sums
    # taper with lag and window cross terms drag the peaks off the period
    num = np.correlate(yd, yd, mode="full")[n - 1:]
    den = np.correlate(w, w, mode="full")[n - 1:]
    ac = np.where(den > 1e-9, num / np.maximum(den, 1e-12), 0.0)
    lag_max = int(0.8 * ac.size)
    ac = ac[:lag_max]
    i = 1
    while i < ac.size - 1 and not (ac[i] < ac[i - 1] and ac[i] <= ac[i + 1]):
        i += 1
    if i >= ac.size - 2:
        raise AperiodicTraceError("no autocorrelation minimum before trace end")
    # every multiple of the period peaks at nearly the same height in the
    # unbiased autocorrelation: take the first significant local maximum
    j = None
    for k in range(i + 1, ac.size - 1):
        if ac[k] >= ac[k - 1] and ac[k] > ac[k + 1] and ac[k] >= 0.5 * ac[0]:
            j = k
            break
    if j is None:
        j = i + int(np.argmax(ac[i:]))
    if j <= i or j >= ac.size - 1 or ac[j] <= 0:
        raise AperiodicTraceError("no secondary autocorrelation peak")

    def _parabolic(k):
        y1, y2, y3 = ac[k - 1], ac[k], ac[k + 1]
        denom = y1 - 2.0 * y2 + y3
        return k + (0.5 * (y1 - y3) / denom if denom != 0 else 0.0)

    # window-edge effects shift individual peaks; locating the highest
    # visible multiple divides that bias by the multiple count
    best_m, best_lag = 1, _parabolic(j)
    m = 2
    while (m * j) + j // 4 + 1 < ac.size:
        lo = m * j - max(j // 4, 2)
        hi = min(m * j + max(j // 4, 2) + 1, ac.size - 1)
        k = lo + int(np.argmax(ac[lo:hi]))
        if lo < k < hi - 1 and ac[k] >= 0.5 * ac[0]:
            best_m, best_lag = m, _parabolic(k)
        m += 1
    return float(best_lag * dt / best_m)


def squeeze_level_from_cuts(state, n_points: int = 301,
                            n_sigma: float = 4.0) -> tuple[float, float]:
    """(|xi|, rotation) via the ring-calibrated 1D Wigner-cut global fit.

    Mirrors the measurement pipeline: calibrate the rotation phase on the
    |alpha| = 0.7 ring, rotate the squeezed axis onto x, sample both axis
    cuts out to ``n_sigma`` standard deviations and fit the shared-amplitude
    Gaussian pair.
    """
    theta = calibrate_phase(state)
    st = apply_virtual_rotation(state, theta) \
        if isinstance(state, QuantumState) else state
    if not isinstance(state, QuantumState):
        raise InvalidParameterError("cut extraction expects a pure state")
    from .analysis import quadrature_moments
    e_a, e_aa, e_n = quadrature_moments(st)
    A = e_n - abs(e_a) ** 2
    B = e_aa - e_a ** 2
    vx = max(0.25 * (1 + 2 * A + 2 * B.real), 1e-6)
    vp = max(0.25 * (1 + 2 * A - 2 * B.real), 1e-6)
    half_x = n_sigma * np.sqrt(min(vx, vp))
    half_p = n_sigma * np.sqrt(max(vx, vp))
    xs = np.linspace(-half_x, half_x, n_points)
    ps = np.linspace(-half_p, half_p, n_points)
    wx = wigner_point_values(st, xs.astype(complex))
    wp = wigner_point_values(st, 1j * ps)
    fit = fit_1d_cuts((xs, wx), (ps, wp))
    return fit.xi_abs, theta


# --- per-point jobs (module level for the process pool) ---

def _drive_point_job(params, *, kerr, kerr2, kerr3, beta, cycles, dim,
                     sample_dt):
    osc = OscillatorParams(kerr=kerr, kerr2=kerr2, kerr3=kerr3)
    drive = DriveParams(detuning=params["delta_mhz"],
                        amplitude=params["omega_mhz"])
    H = build_driven_kerr(osc, drive, dim)
    psi0 = fock_state(0, dim)
    # period guess from the empirical T ~ 3.9 K^{-1/3} Omega^{-2/3} law
    if drive.amplitude <= 0:
        raise AperiodicTraceError("undriven Kerr oscillator has no cycle")
    t_guess = 3.9 * (TWO_PI * kerr) ** (-1 / 3) \
        * (TWO_PI * drive.amplitude) ** (-2 / 3) + 0.14
    D = displacement_operator(beta, dim)
    disp0 = QuantumState(D.elements @ psi0.amplitudes)
    res = trajectory([(H, (cycles + 1.5) * t_guess)], disp0, sample_dt,
                     {"n": number_operator(dim)})
    period = extract_period(res.times, res.expectations["n"])
    cyc = run_cyclic_squeeze(osc, drive, beta, cycles, period, psi0,
                             rotation="none")
    fids, xis = [], []
    for snap in cyc.snapshots:
        r, _, f = best_fit_squeezed_vacuum(snap)
        xis.append(r)
        fids.append(f)
    rate = xis[-1] / cyc.cycle_times[-1] / TWO_PI
    return {
        "mean_infidelity": 1.0 - float(np.mean(fids)),
        "rate_mhz": float(rate),
        "n_max": float(res.expectations["n"].max()),
        "period_us": float(period),
        "xi_final": float(xis[-1]),
    }


def _decay_point_job(params, *, kerr, kerr2, kerr3, delta, omega, beta,
                     cycles, period, dim, dt_max):
    ratio = params["kappa_over_k"]
    osc = OscillatorParams(kerr=kerr, kerr2=kerr2, kerr3=kerr3,
                           kappa=ratio * kerr)
    drive = DriveParams(detuning=delta, amplitude=omega)
    psi0 = fock_state(0, dim)
    cyc = run_cyclic_squeeze(osc, drive, beta, cycles, period, psi0,
                             rotation="none", lindblad=True, dt_max=dt_max)
    out = {}
    for c, snap in enumerate(cyc.snapshots, start=1):
        r, _, _ = best_fit_squeezed_vacuum(snap)
        out[f"xi_cycle_{c}"] = float(r)
    return out


def _trotter_dt_job(params, *, kerr, beta, delta_d, total_time, dim,
                    displacement_duration):
    dt = params["delta_t_us"]
    steps = int(round(total_time / dt))
    if steps < 1 or abs(steps * dt - total_time) > 0.5 * dt + 1e-12:
        raise InvalidParameterError(
            f"total time {total_time} not divisible by dt {dt}")
    osc = OscillatorParams(kerr=kerr)
    cfg = TrotterConfig(beta=beta, delta_t=dt, steps=steps, order=1,
                        detuning=delta_d,
                        displacement_duration=displacement_duration)
    res = run_trotter_squeeze(osc, cfg, fock_state(0, dim))
    xi_fit, _ = squeeze_level_from_cuts(res.final_state)
    # Trotter-error reference: exact KPO propagation over the same time
    dprime = delta_d - 2.0 * kerr * abs(beta) ** 2
    Hk = build_kpo(osc, FrameParams(beta), dprime, dim)
    exact = evolve_unitary(Hk, steps * dt, fock_state(0, dim))
    infid = 1.0 - abs(np.vdot(exact.amplitudes,
                              res.final_state.amplitudes)) ** 2
    return {
        "level_db_final": float(squeezing_level_db(xi_fit)),
        "xi_final": float(xi_fit),
        "steps": float(steps),
        "infidelity_kpo": float(max(infid, 0.0)),
    }


def _detuning_objective(delta_mhz, *, osc, beta, dt, steps, dim):
    cfg = TrotterConfig(beta=beta, delta_t=dt, steps=steps, order=1,
                        detuning=float(delta_mhz))
    try:
        res = run_trotter_squeeze(osc, cfg, fock_state(0, dim))
    except TruncationFault:
        # detunings inside the hyperbolic band of the two-photon Hamiltonian
        # blow through any cutoff; they carry no squeezing optimum
        return 0.0
    xi_vars = [min_variance_xi(s) for s in res.snapshots]
    order = np.argsort(xi_vars)[-4:]
    peak = 0.0
    for j in order:
        try:
            xi_fit, _ = squeeze_level_from_cuts(res.snapshots[j])
        except (DegeneratePhaseError, FitFailureError):
            continue
        peak = max(peak, xi_fit)
    if peak == 0.0:
        raise FitFailureError(f"no usable squeezing fit at delta={delta_mhz}")
    return peak


def _detuning_point_job(params, *, kerr, dt, steps, dim_pad):
    beta_sq = params["beta_sq"]
    beta = float(np.sqrt(beta_sq))
    dim = dim_pad if dim_pad else suggest_dim_coherent(beta) + 60
    osc = OscillatorParams(kerr=kerr)
    lo = max(0.25 * 2.0 * kerr * beta_sq, 1e-4)
    hi = 1.5 * 2.0 * kerr * beta_sq + 5e-3
    coarse = np.linspace(lo, hi, 9)
    vals = [_detuning_objective(d, osc=osc, beta=beta, dt=dt, steps=steps,
                                dim=dim) for d in coarse]
    j = int(np.argmax(vals))
    if j == 0 or j == len(coarse) - 1:
        raise FitFailureError(
            f"detuning optimum at bracket edge for |beta|^2={beta_sq}: "
            f"scan={list(zip(coarse, vals))}")
    a, b = coarse[j - 1], coarse[j + 1]
    # golden-section refinement on the bracketed interior maximum
    gr = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = _detuning_objective(c, osc=osc, beta=beta, dt=dt, steps=steps, dim=dim)
    fd = _detuning_objective(d, osc=osc, beta=beta, dt=dt, steps=steps, dim=dim)
    for _ in range(10):
        if b - a < 0.02 * coarse[j]:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = _detuning_objective(c, osc=osc, beta=beta, dt=dt,
                                     steps=steps, dim=dim)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = _detuning_objective(d, osc=osc, beta=beta, dt=dt,
                                     steps=steps, dim=dim)
    best = c if fc > fd else d
    return {"delta_opt_mhz": float(best),
            "xi_peak": float(max(fc, fd))}


def _qubit_point_job(params, *, cavity_freq, qubit_freq, anharmonicity,
                     coupling, qubit_levels, dt, steps, cavity_dim):
    beta_sq = params["beta_sq"]
    beta = float(np.sqrt(beta_sq))
    cdim = cavity_dim if cavity_dim else suggest_dim_coherent(beta) + 30
    jc = JcParams(cavity_freq=cavity_freq, qubit_freq=qubit_freq,
                  anharmonicity=anharmonicity, coupling=coupling,
                  qubit_levels=qubit_levels)
    H = build_jc(jc, cdim)
    q_levels = jc.qubit_levels
    Dq = {g: np.kron(displacement_operator(g, cdim).elements,
                     np.eye(q_levels)) for g in (beta, -2 * beta, 2 * beta)}
    from .evolve import hamiltonian_eig
    w, V = hamiltonian_eig(H)
    psi = np.zeros(cdim * q_levels, dtype=complex)
    psi[0] = 1.0
    psi = Dq[beta] @ psi

    def u(amp, t):
        return V @ (np.exp(-1j * w * t) * (V.conj().T @ amp))

    out = {}
    for k in range(1, steps + 1):
        psi = u(psi, dt / 2.0)
        psi = Dq[-2 * beta] @ psi
        psi = u(psi, dt / 2.0)
        pops = np.abs(psi.reshape(cdim, q_levels)) ** 2
        p_exc = float(pops[:, 1:].sum() / pops.sum())
        out[f"p_excited_step_{k}"] = p_exc
        if k < steps:
            psi = Dq[2 * beta] @ psi
    return out


# --- public scans ---

def scan_drive_params(delta_grid, omega_grid, osc: OscillatorParams,
                      beta: complex, cycles: int, dim: int = 240,
                      sample_dt: float = 0.004,
                      workers: int = 1) -> list[SweepRecord]:
    """Cyclic-protocol figures of merit over a (detuning, amplitude) grid."""
    if len(delta_grid) == 0 or len(omega_grid) == 0:
        raise InvalidParameterError("grids must be non-empty")
    points = [{"delta_mhz": float(d), "omega_mhz": float(o)}
              for d in delta_grid for o in omega_grid]
    return run_grid(points, _drive_point_job, workers=workers,
                    kerr=osc.kerr, kerr2=osc.kerr2, kerr3=osc.kerr3,
                    beta=beta, cycles=cycles, dim=dim, sample_dt=sample_dt)


def scan_decay(ratio_grid, osc_base: OscillatorParams, drive: DriveParams,
               beta: complex, cycles: int, period: float, dim: int = 200,
               dt_max: float = 0.002, workers: int = 1) -> list[SweepRecord]:
    """Squeezing growth under single-photon loss at kappa = ratio * K."""
    if any(r < 0 for r in ratio_grid):
        raise InvalidParameterError("ratios must be >= 0")
    points = [{"kappa_over_k": float(r)} for r in ratio_grid]
    return run_grid(points, _decay_point_job, workers=workers,
                    kerr=osc_base.kerr, kerr2=osc_base.kerr2,
                    kerr3=osc_base.kerr3, delta=drive.detuning,
                    omega=drive.amplitude, beta=beta, cycles=cycles,
                    period=period, dim=dim, dt_max=dt_max)


def scan_trotter_dt(dt_grid, total_time: float, beta: complex,
                    osc: OscillatorParams, delta_d: float,
                    displacement_duration: float = 0.0, dim: int = 180,
                    workers: int = 1) -> list[SweepRecord]:
    """Final squeezing level and Trotter error versus step size."""
    points = [{"delta_t_us": float(dt)} for dt in dt_grid]
    return run_grid(points, _trotter_dt_job, workers=workers,
                    kerr=osc.kerr, beta=beta, delta_d=delta_d,
                    total_time=total_time, dim=dim,
                    displacement_duration=displacement_duration)


def optimize_detuning(beta_sq_grid, osc: OscillatorParams, dt: float,
                      steps: int, dim: int = 0,
                      workers: int = 1) -> list[SweepRecord]:
    """Detuning maximizing the peak fitted |xi| per displacement amplitude."""
    points = [{"beta_sq": float(b)} for b in beta_sq_grid]
    return run_grid(points, _detuning_point_job, workers=workers,
                    kerr=osc.kerr, dt=dt, steps=steps, dim_pad=dim)


def scan_qubit_excitation(jc: JcParams, beta_sq_grid, steps: int,
                          dt: float = 0.08, cavity_dim: int = 0,
                          workers: int = 1) -> list[SweepRecord]:
    """Qubit excitation during the Trotter displacement pattern on the JC model."""
    for b in beta_sq_grid:
        cdim = cavity_dim if cavity_dim else suggest_dim_coherent(np.sqrt(b)) + 30
        if cdim * jc.qubit_levels > 2000:
            raise InvalidDimensionError(
                f"|beta|^2={b} needs tensor dimension {cdim * jc.qubit_levels}")
    points = [{"beta_sq": float(b)} for b in beta_sq_grid]
    return run_grid(points, _qubit_point_job, workers=workers,
                    cavity_freq=jc.cavity_freq, qubit_freq=jc.qubit_freq,
                    anharmonicity=jc.anharmonicity, coupling=jc.coupling,
                    qubit_levels=jc.qubit_levels, dt=dt, steps=steps,
                    cavity_dim=cavity_dim)


# --- persistence ---

def write_table(records: list[SweepRecord], path, meta: dict | None = None) -> None:
    """CSV table (params, metrics, status) plus a JSON metadata sidecar.

    Column order and row order are canonical; floats carry 17 significant
    digits, so identical sweeps serialize byte-identically.
    """
    path = str(path)
    param_keys = sorted({k for r in records for k in r.params})
    metric_keys = sorted({k for r in records for k in r.metrics})
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(param_keys + metric_keys + ["status"])
        for r in sorted(records, key=lambda r: r.key()):
            row = [f"{r.params[k]:.17g}" for k in param_keys]
            row += [f"{r.metrics[k]:.17g}" if k in r.metrics else ""
                    for k in metric_keys]
            row.append(r.status)
            wr.writerow(row)
    if meta is not None:
        with open(path + ".json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)


def read_table(path) -> list[SweepRecord]:
    records = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        for row in rd:
            status = row.pop("status")
            params, metrics = {}, {}
            for k, v in row.items():
                if v == "":
                    continue
                # params precede metrics in write order; reconstruct by name
                (params if k in _PARAM_NAMES else metrics)[k] = float(v)
            records.append(SweepRecord(params=params, metrics=metrics,
                                       status=status))
    return records


_PARAM_NAMES = {"delta_mhz", "omega_mhz", "kappa_over_k", "delta_t_us",
                "beta_sq"}
