"""Matrix-free right-preconditioned BiCGSTAB."""
from __future__ import annotations

from typing import Callable

import numpy as np


def _dot(a, b) -> float:
    # contiguous 1-D sum uses numpy's pairwise reduction: fixed order, reproducible
    return float(np.sum((a * b).ravel()))


def bicgstab(apply: Callable, rhs: np.ndarray, inv_diag: np.ndarray, tol: float, max_iter: int = 5000):
    """Solve ``A x = rhs`` until ``max|rhs - A x| <= tol``.

    Returns ``(x, iterations, residual_inf)``; the caller decides what to do
    when the tolerance was not met.
    """
    x = np.zeros_like(rhs)
    r = rhs.copy()
    res = float(np.max(np.abs(r), initial=0.0))
    if res <= tol:
        return x, 0, res
    rhat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(rhs)
    p = np.zeros_like(rhs)
    for it in range(1, max_iter + 1):
        rho_new = _dot(rhat, r)
        if rho_new == 0.0:
            break
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        phat = inv_diag * p
        v = apply(phat)
        alpha = rho_new / _dot(rhat, v)
        s = r - alpha * v
        if float(np.max(np.abs(s))) <= tol:
            x += alpha * phat
            return x, it, float(np.max(np.abs(s)))
        shat = inv_diag * s
        t = apply(shat)
        tt = _dot(t, t)
        if tt == 0.0:
            x += alpha * phat
            return x, it, float(np.max(np.abs(s)))
        omega = _dot(t, s) / tt
        x += alpha * phat + omega * shat
        r = s - omega * t
        res = float(np.max(np.abs(r)))
        if res <= tol or omega == 0.0:
            return x, it, res
        rho = rho_new
    res = float(np.max(np.abs(rhs - apply(x))))
    return x, max_iter, res
