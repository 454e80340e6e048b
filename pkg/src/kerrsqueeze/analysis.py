"""Phase-space analysis of squeezed states.

Wigner functions are evaluated by displaced parity,
W(alpha) = (2/pi) Tr[D(-alpha) rho D(alpha) Pi], through an exact Laguerre
recurrence.  Squeezing parameters come from fits of the squeezed-Fock Wigner
model; Fisher information and Wigner logarithmic negativity are grid
integrals; maximum-likelihood reconstruction inverts a set of Wigner samples
back to a density matrix.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.sparse import dia_matrix
from scipy.sparse.linalg import expm_multiply
from scipy.special import eval_laguerre

from ._wigner import wigner_values
from .errors import (
    FitFailureError,
    InvalidParameterError,
    UnderDeterminedError,
)
from .fockcore import (
    DensityMatrix,
    QuantumState,
    displacement_matrix,
    ladder_operators,
    squeezed_vacuum_amplitudes,
)

__all__ = [
    "GridSpec",
    "WignerGrid",
    "SqueezeFit",
    "wigner",
    "wigner_point_values",
    "analytic_squeezed_fock_wigner",
    "squeezing_level_db",
    "fit_1d_cuts",
    "fit_2d_wigner",
    "fisher_information",
    "wigner_log_negativity",
    "mle_reconstruct",
    "best_fit_squeezed_vacuum",
    "best_fit_squeezed_fock",
    "quadrature_moments",
    "min_variance_xi",
    "default_grid_spec",
]

LOG10_E_20 = 20.0 * np.log10(np.e)  # 8.6859 dB per unit |xi|


def _as_rho(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    if isinstance(state, DensityMatrix):
        return state.elements
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Rectangular phase-space grid; alpha = x + i p."""

    x_min: float
    x_max: float
    nx: int
    p_min: float
    p_max: float
    np_: int

    def __post_init__(self):
        if self.nx < 2 or self.np_ < 2:
            raise InvalidParameterError("grid needs at least 2 points per axis")
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise InvalidParameterError("grid bounds must be increasing")

    @classmethod
    def square(cls, half_width: float, n: int) -> "GridSpec":
        return cls(-half_width, half_width, n, -half_width, half_width, n)

    @property
    def x_values(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def p_values(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.np_)


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a rectangular grid, values[i, j] = W(x_i + i p_j)."""

    x_values: np.ndarray
    p_values: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x_values, float)
        p = np.asarray(self.p_values, float)
        v = np.asarray(self.values, float)
        for arr in (x, p, v):
            arr.setflags(write=False)
        object.__setattr__(self, "x_values", x)
        object.__setattr__(self, "p_values", p)
        object.__setattr__(self, "values", v)
        if v.shape != (x.size, p.size):
            raise InvalidParameterError(
                f"values shape {v.shape} != ({x.size}, {p.size})")

    @property
    def dx(self) -> float:
        return float(self.x_values[1] - self.x_values[0])

    @property
    def dp(self) -> float:
        return float(self.p_values[1] - self.p_values[0])

    @property
    def normalization(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)

    def to_csv(self, path, sidecar: bool = True) -> None:
        """Write columns x, p, w (17 significant digits) plus a JSON sidecar."""
        path = str(path)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "p", "w"])
            for i, x in enumerate(self.x_values):
                for j, p in enumerate(self.p_values):
                    wr.writerow([f"{x:.17g}", f"{p:.17g}",
                                 f"{self.values[i, j]:.17g}"])
        if sidecar:
            meta = {"nx": int(self.x_values.size), "np": int(self.p_values.size),
                    "dx": self.dx, "dp": self.dp,
                    "x_min": float(self.x_values[0]),
                    "x_max": float(self.x_values[-1]),
                    "p_min": float(self.p_values[0]),
                    "p_max": float(self.p_values[-1])}
            meta.update({k: v for k, v in self.meta.items()
                         if isinstance(v, (int, float, str))})
            with open(path + ".json", "w") as fh:
                json.dump(meta, fh, indent=1, sort_keys=True)

    @classmethod
    def from_csv(cls, path) -> "WignerGrid":
        xs, ps, ws = [], [], []
        with open(path, newline="") as fh:
            rd = csv.reader(fh)
            header = next(rd)
            if [h.strip() for h in header] != ["x", "p", "w"]:
                raise InvalidParameterError(
                    f"bad Wigner CSV header {header!r}, expected x,p,w")
            for row in rd:
                xs.append(float(row[0]))
                ps.append(float(row[1]))
                ws.append(float(row[2]))
        x_vals = np.unique(np.asarray(xs))
        p_vals = np.unique(np.asarray(ps))
        if x_vals.size * p_vals.size != len(ws):
            raise InvalidParameterError("Wigner CSV is not a full rectangular grid")
        v = np.full((x_vals.size, p_vals.size), np.nan)
        ix = np.searchsorted(x_vals, xs)
        ip = np.searchsorted(p_vals, ps)
        v[ix, ip] = ws
        return cls(x_vals, p_vals, v)


@dataclass(frozen=True)
class SqueezeFit:
    """Squeezing parameters extracted from a Wigner fit."""

    xi_abs: float
    phi: float
    n_fock: int
    ci95: dict[str, float]
    residual_rms: float

    def __post_init__(self):
        if self.xi_abs < 0 or self.n_fock < 0:
            raise InvalidParameterError("xi_abs and n_fock must be >= 0")
        if any(v < 0 for v in self.ci95.values()):
            raise InvalidParameterError("confidence half-widths must be >= 0")

    @property
    def level_db(self) -> float:
        return squeezing_level_db(self.xi_abs)

    def to_json_dict(self) -> dict:
        return {"xi_abs": self.xi_abs, "phi": self.phi, "n_fock": self.n_fock,
                "level_db": self.level_db, "ci95": dict(self.ci95),
                "residual_rms": self.residual_rms}


def squeezing_level_db(xi_abs: float) -> float:
    """20 log10(e^{|xi|}) = 8.6859 |xi| dB."""
    if xi_abs < 0:
        raise InvalidParameterError("xi_abs must be >= 0")
    return LOG10_E_20 * xi_abs


def wigner_point_values(state, alphas) -> np.ndarray:
    """W at arbitrary complex points (no grid bookkeeping)."""
    return wigner_values(_as_rho(state), np.asarray(alphas, dtype=complex))


def quadrature_moments(state) -> tuple[complex, complex, float]:
    """(<a>, <aa>, <a†a>) of a pure or mixed state."""
    rho = _as_rho(state)
    dim = rho.shape[0]
    a, _ = ladder_operators(dim)
    e_a = complex(np.trace(rho @ a.elements))
    e_aa = complex(np.trace(rho @ (a.elements @ a.elements)))
    e_n = float(np.real(np.trace(rho @ (a.elements.conj().T @ a.elements))))
    return e_a, e_aa, e_n


def min_variance_xi(state) -> float:
    """|xi| implied by the minimum quadrature variance over all angles.

    Negative values indicate a state broader than vacuum along every axis.
    """
    e_a, e_aa, e_n = quadrature_moments(state)
    A = e_n - abs(e_a) ** 2
    B = e_aa - e_a ** 2
    vmin = 0.25 * (1.0 + 2.0 * A - 2.0 * abs(B))
    vmin = max(vmin, 1e-12)
    return float(-0.5 * np.log(4.0 * vmin))


def default_grid_spec(state, n: int = 81, n_sigma: float = 5.0) -> GridSpec:
    """Square grid spanning +-n_sigma of the anti-squeezed standard deviation."""
    e_a, e_aa, e_n = quadrature_moments(state)
    A = e_n - abs(e_a) ** 2
    B = e_aa - e_a ** 2
    vmax = 0.25 * (1.0 + 2.0 * A + 2.0 * abs(B))
    half = max(n_sigma * np.sqrt(max(vmax, 0.25)), 2.0) + abs(e_a)
    return GridSpec.square(float(half), n)


def wigner(state, grid: GridSpec, coverage_warning_tol: float = 0.01) -> WignerGrid:
    """Wigner function on a rectangular grid with a normalization check."""
    rho = _as_rho(state)
    alphas = grid.x_values[:, None] + 1j * grid.p_values[None, :]
    vals = wigner_values(rho, alphas)
    out = WignerGrid(grid.x_values, grid.p_values, vals)
    defect = abs(out.normalization - 1.0)
    if defect > coverage_warning_tol:
        out = WignerGrid(grid.x_values, grid.p_values, vals,
                         meta={"coverage_warning": True,
                               "normalization_defect": defect})
    return out


def analytic_squeezed_fock_wigner(xi: complex, n_fock: int, alphas) -> np.ndarray:
    """Wigner function of S(xi)|N>:

    W = (2/pi)(-1)^N exp(-2|nu|^2) L_N(4|nu|^2),
    nu = cosh|xi| alpha* + e^{-i phi} sinh|xi| alpha.
    """
    al = np.asarray(alphas, dtype=complex)
    r, phi = abs(xi), (np.angle(xi) if xi != 0 else 0.0)
    nu = np.cosh(r) * al.conj() + np.exp(-1j * phi) * np.sinh(r) * al
    q = 4.0 * np.abs(nu) ** 2
    return (2.0 / np.pi) * (-1.0) ** n_fock * np.exp(-q / 2.0) \
        * eval_laguerre(n_fock, q)


def _ci_from_jacobian(resid: np.ndarray, jac: np.ndarray,
                      names: list[str]) -> dict[str, float]:
    """95% half-widths from the linearized covariance at the optimum."""
    dof = max(resid.size - jac.shape[1], 1)
    s2 = float(resid @ resid) / dof
    try:
        cov = s2 * np.linalg.inv(jac.T @ jac)
        widths = 1.96 * np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        widths = np.full(len(names), np.inf)
    return {nm: float(w) for nm, w in zip(names, widths)}


def fit_1d_cuts(cut_x: tuple[np.ndarray, np.ndarray],
                cut_p: tuple[np.ndarray, np.ndarray]) -> SqueezeFit:
    """Global Gaussian fit of the two axis cuts with shared width and amplitude.

    Model: A exp(-2 e^{2s} x^2) along the squeezed axis and
    A exp(-2 e^{-2s} p^2) along the anti-squeezed one.  The cuts must already
    be aligned with the squeezing axes (phase pre-calibrated); if the x cut
    turns out wider than the p cut the two are swapped and the orientation is
    reported as phi = pi/2.
    """
    xs, wx = (np.asarray(v, float) for v in cut_x)
    ps, wp = (np.asarray(v, float) for v in cut_p)

    def resid(th):
        s, amp = th
        mx = amp * np.exp(-2.0 * np.exp(2.0 * s) * xs ** 2)
        mp = amp * np.exp(-2.0 * np.exp(-2.0 * s) * ps ** 2)
        return np.concatenate([mx - wx, mp - wp])

    res = least_squares(resid, x0=[0.2, 2.0 / np.pi], method="lm", max_nfev=4000)
    if not res.success and np.linalg.norm(res.fun) > 1e-8:
        raise FitFailureError(f"1D cut fit failed: {res.message}")
    s, amp = res.x
    phi = 0.0
    if s < 0:
        s, phi = -s, np.pi / 2.0
    ci = _ci_from_jacobian(res.fun, res.jac, ["xi_abs", "amplitude"])
    rms = float(np.sqrt(np.mean(res.fun ** 2)))
    return SqueezeFit(xi_abs=float(s), phi=phi, n_fock=0,
                      ci95={"xi_abs": ci["xi_abs"]}, residual_rms=rms)


def fit_2d_wigner(grid: WignerGrid, n_fock_hint: int = 0,
                  select_n: bool = False,
                  phase_starts=None,
                  max_iter: int = 2000) -> SqueezeFit:
    """Nonlinear least squares of the squeezed-Fock Wigner model.

    Fits (|xi|, phi, amplitude) with the Fock index fixed to the hint, or,
    with ``select_n``, chosen by best residual over {hint-1, hint, hint+1}.
    Derivative-free simplex, multi-started across the 2 pi phase period
    (the ellipse orientation is phi/2) plus a moment-based phase seed.
    """
    alphas = grid.x_values[:, None] + 1j * grid.p_values[None, :]
    w = grid.values.ravel()
    xi0 = 0.3
    if phase_starts is None:
        phase_starts = tuple(k * np.pi / 2 for k in range(4))
        # seed from the second-moment phase of the sampled distribution
        wpos = np.clip(grid.values, 0.0, None).ravel()
        if wpos.sum() > 0:
            aa = np.sum(wpos * (alphas.ravel() ** 2)) / wpos.sum()
            if abs(aa) > 1e-12:
                phase_starts += (float(np.angle(-np.conj(aa))),)

    def sse(theta, n_fock):
        r, phi, amp = theta
        if not 0.0 <= r <= 4.0:
            return 1e12
        model = amp * analytic_squeezed_fock_wigner(
            r * np.exp(1j * phi), n_fock, alphas).ravel()
        d = model - w
        return float(d @ d)

    candidates = [n_fock_hint]
    if select_n:
        candidates = sorted({max(0, n_fock_hint - 1), n_fock_hint,
                             n_fock_hint + 1})
    best = None
    for n_fock in candidates:
        for phi0 in phase_starts:
            res = minimize(sse, x0=[xi0, phi0, 1.0], args=(n_fock,),
                           method="Nelder-Mead",
                           options={"xatol": 1e-8, "fatol": 1e-16,
                                    "maxiter": max_iter})
            if best is None or res.fun < best[0].fun:
                best = (res, n_fock)
    res, n_fock = best
    if not np.isfinite(res.fun):
        raise FitFailureError("2D Wigner fit diverged")
    r, phi, amp = res.x
    if r < 0:
        r, phi = -r, phi + np.pi
    phi = float(phi % (2 * np.pi))
    # numeric Jacobian at the optimum for the linearized covariance
    theta = np.array([r, phi, amp])
    model0 = amp * analytic_squeezed_fock_wigner(
        r * np.exp(1j * phi), n_fock, alphas).ravel()
    resid = model0 - w
    jac = np.empty((w.size, 3))
    for k in range(3):
        h = 1e-6 * max(1.0, abs(theta[k]))
        tp = theta.copy()
        tp[k] += h
        mp = tp[2] * analytic_squeezed_fock_wigner(
            tp[0] * np.exp(1j * tp[1]), n_fock, alphas).ravel()
        jac[:, k] = (mp - model0) / h
    ci = _ci_from_jacobian(resid, jac, ["xi_abs", "phi", "amplitude"])
    rms = float(np.sqrt(res.fun / w.size))
    return SqueezeFit(xi_abs=float(r), phi=phi, n_fock=int(n_fock),
                      ci95={"xi_abs": ci["xi_abs"], "phi": ci["phi"]},
                      residual_rms=rms)


def fisher_information(grid: WignerGrid, p_floor: float = 1e-12) -> float:
    """Displacement sensitivity along x from the position marginal:

    I_F = integral (d ln P/dx)^2 P dx with P(x) = integral W dp.

    Central differences; bins at or below ``p_floor`` (and their neighbors'
    derivative stencils) are excluded from the sum.
    """
    if p_floor <= 0:
        raise InvalidParameterError("p_floor must be positive")
    P = grid.values.sum(axis=1) * grid.dp
    dx = grid.dx
    ok = P > p_floor
    lnP = np.where(ok, np.log(np.where(ok, P, 1.0)), 0.0)
    valid = ok.copy()
    valid[1:-1] &= ok[2:] & ok[:-2]
    valid[0] = valid[-1] = False
    dln = np.zeros_like(P)
    dln[1:-1] = (lnP[2:] - lnP[:-2]) / (2.0 * dx)
    return float(np.sum(np.where(valid, dln ** 2 * P, 0.0)) * dx)


def wigner_log_negativity(grid: WignerGrid) -> float:
    """log2 of the integral of |W| over the grid."""
    total = float(np.abs(grid.values).sum() * grid.dx * grid.dp)
    return float(np.log2(total))


def _parity_kernel(alpha: complex, dim: int) -> np.ndarray:
    """(2/pi) <m|D(2 alpha)|n> (-1)^n, the exact displaced-parity kernel."""
    D = displacement_matrix(2.0 * alpha, dim)
    signs = (-1.0) ** np.arange(dim)
    return (2.0 / np.pi) * D * signs[None, :]


def mle_reconstruct(samples: list[tuple[complex, float]], dim: int,
                    iters: int = 300, tol: float = 1e-12,
                    sigma: float = 1.0,
                    return_trace: bool = False):
    """Density matrix from Wigner samples by likelihood ascent on the PSD cone.

    Maximizes the Gaussian likelihood of the predicted Wigner values with an
    R rho R update (R = 1 + eta grad, Hermitian), trace renormalization each
    step and backtracking on eta so the stored likelihood trace never
    decreases.  The iteration starts from the PSD-projected linear inversion
    of the sample set.  Raises ``UnderDeterminedError`` for fewer samples
    than the dim^2 real degrees of freedom.
    """
    if len(samples) < dim * dim:
        raise UnderDeterminedError(
            f"{len(samples)} samples for {dim * dim} degrees of freedom")
    alphas = np.array([a for a, _ in samples], dtype=complex)
    w = np.array([v for _, v in samples], dtype=float)
    Ms = np.stack([_parity_kernel(a, dim) for a in alphas])

    # linear inversion start: w_k = Tr[M_k rho] = Ms_k . vec(rho^T)
    Amat = Ms.reshape(len(samples), -1)
    x, *_ = np.linalg.lstsq(Amat, w.astype(complex), rcond=None)
    rho = x.reshape(dim, dim).T
    rho = 0.5 * (rho + rho.conj().T)
    ev, U = np.linalg.eigh(rho)
    ev = np.clip(ev.real, 0.0, None)
    rho = ((U * ev) @ U.conj().T / ev.sum()) if ev.sum() > 0 \
        else np.eye(dim, dtype=complex) / dim

    def predict(r):
        return np.einsum("kij,ji->k", Ms, r).real

    pred = predict(rho)
    logl = -0.5 * float(np.sum((pred - w) ** 2)) / sigma ** 2
    trace = [logl]
    eta = 1.0
    for _ in range(iters):
        grad = np.einsum("k,kij->ij", (w - pred) / sigma ** 2, Ms)
        grad = 0.5 * (grad + grad.conj().T)
        gn = np.linalg.norm(grad, 2)
        if gn < 1e-14:
            break
        accepted = False
        while eta > 1e-10:
            R = np.eye(dim) + (eta / gn) * grad
            cand = R @ rho @ R.conj().T
            cand /= np.trace(cand).real
            pred_c = predict(cand)
            logl_c = -0.5 * float(np.sum((pred_c - w) ** 2)) / sigma ** 2
            if logl_c >= logl:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        improvement = logl_c - logl
        rho, pred, logl = cand, pred_c, logl_c
        trace.append(logl)
        eta = min(eta * 1.3, 1.0)
        if improvement < tol * max(1.0, abs(logl)):
            break
    rho = 0.5 * (rho + rho.conj().T)
    ev, U = np.linalg.eigh(rho)
    ev = np.clip(ev.real, 0.0, None)
    rho = (U * ev) @ U.conj().T / ev.sum()
    out = DensityMatrix(rho)
    if return_trace:
        return out, trace
    return out


def _squeezed_fock_column(xi: complex, n_fock: int, dim: int) -> np.ndarray:
    """S(xi)|N> via a banded Krylov exponential (no dense expm)."""
    if n_fock == 0:
        return squeezed_vacuum_amplitudes(xi, dim)
    a, _ = ladder_operators(dim)
    a2 = a.elements @ a.elements
    G = 0.5 * np.conj(xi) * a2 - 0.5 * xi * a2.conj().T
    e = np.zeros(dim, dtype=complex)
    e[n_fock] = 1.0
    col = expm_multiply(dia_matrix(G), e)
    return col / np.linalg.norm(col)


def best_fit_squeezed_vacuum(state) -> tuple[float, float, float]:
    """(|xi|, phi, fidelity) of the closest ideal squeezed vacuum.

    Pure states use |<xi|psi>|^2, mixed states <xi|rho|xi>; the state is
    re-centered on its mean amplitude first so loss-induced drift does not
    masquerade as squeezing.
    """
    return best_fit_squeezed_fock(state, 0)


def best_fit_squeezed_fock(state, n_fock: int) -> tuple[float, float, float]:
    """(|xi|, phi, fidelity) of the closest ideal squeezed Fock state."""
    rho = _as_rho(state)
    dim = rho.shape[0]
    a, _ = ladder_operators(dim)
    mean_a = complex(np.trace(rho @ a.elements))
    if abs(mean_a) > 1e-9:
        from .fockcore import displacement_operator
        Dc = displacement_operator(-mean_a, dim).elements
        rho = Dc @ rho @ Dc.conj().T
    e_aa = complex(np.trace(rho @ (a.elements @ a.elements)))
    e_n = float(np.real(np.trace(rho @ np.diag(np.arange(dim)))))
    r0 = float(np.arcsinh(np.sqrt(max(e_n - n_fock, 1e-6) / (2 * n_fock + 1))))
    phi0 = float(np.angle(-e_aa)) if abs(e_aa) > 1e-12 else 0.0

    def negF(theta):
        r, phi = theta
        if not 0.0 <= r <= 4.0:
            return 1.0
        col = _squeezed_fock_column(r * np.exp(1j * phi), n_fock, dim)
        return -float(np.real(col.conj() @ (rho @ col)))

    best = None
    for phi_init in (phi0, phi0 + np.pi):
        res = minimize(negF, x0=[max(r0, 1e-3), phi_init], method="Nelder-Mead",
                       options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 500})
        if best is None or res.fun < best.fun:
            best = res
    r, phi = best.x
    if r < 0:
        r, phi = -r, phi + np.pi
    return float(r), float(phi % (2 * np.pi)), float(-best.fun)
