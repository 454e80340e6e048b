"""Pointwise Wigner-function evaluation on the truncated Fock basis.

W(alpha) = (2/pi) Tr[rho D(2 alpha) Pi], expanded over the diagonals of rho
with exact displacement matrix elements.  The generalized Laguerre recurrence
is run on e^{-x/2}-scaled values so nothing overflows even at dim ~ 300 and
|alpha| ~ 15.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

__all__ = ["wigner_values"]


def _effective_dim(rho: np.ndarray, eps: float = 1e-14) -> int:
    mag = np.abs(rho)
    scale = mag.max()
    if scale == 0.0:
        return 1
    occupied = np.nonzero(mag.max(axis=0) > eps * scale)[0]
    return int(occupied[-1]) + 1 if occupied.size else 1


def wigner_values(rho: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """Evaluate W at arbitrary complex phase-space points.

    Parameters
    ----------
    rho : (dim, dim) complex ndarray
        Density matrix in the Fock basis (need not be exactly unit trace).
    alphas : complex ndarray, any shape
        Phase-space points alpha = x + i p.

    Returns
    -------
    ndarray of the same shape as ``alphas`` with real Wigner values.
    """
    al = np.asarray(alphas, dtype=complex)
    shape = al.shape
    al = al.ravel()
    x = 4.0 * np.abs(al) ** 2
    absa = np.abs(al)
    unit = np.where(absa > 0, al / np.where(absa > 0, absa, 1.0), 1.0)

    dim = _effective_dim(rho)
    rho = rho[:dim, :dim]
    W = np.zeros(al.size)
    signs = (-1.0) ** np.arange(dim)

    for k in range(dim):
        diag = np.diag(rho, k)
        if not np.any(np.abs(diag) > 1e-18):
            continue
        # B_m = sqrt(m!/(m+k)!) (2|alpha|)^k e^{-x/2} L_m^{(k)}(x), via the
        # three-term recurrence; scaling keeps B bounded.
        logB0 = 0.5 * k * np.log(np.where(x > 0, x, 1.0)) - 0.5 * x \
            - 0.5 * gammaln(k + 1)
        B_prev = np.exp(logB0)
        if k > 0:
            B_prev = np.where(x > 0, B_prev, 0.0)
        acc = (diag[0] * signs[0]) * B_prev.astype(complex)
        B_pp = np.zeros_like(B_prev)
        for m in range(1, dim - k):
            c1 = np.sqrt(m / (m + k))
            c2 = np.sqrt((m - 1) / (m - 1 + k)) if m > 1 else 0.0
            B = ((2 * m - 1 + k - x) * c1 * B_prev
                 - (m - 1 + k) * (c1 * c2) * B_pp) / m
            acc = acc + (diag[m] * signs[m]) * B
            B_pp, B_prev = B_prev, B
        if k == 0:
            W += acc.real
        else:
            W += 2.0 * (acc * unit ** k).real
    return (2.0 / np.pi) * W.reshape(shape)
