"""Pure numpy implementation of the stencil kernels."""
from __future__ import annotations

import numpy as np

from .stencil import OFFSETS


def apply_stencil(W: np.ndarray, u: np.ndarray, out: np.ndarray, threads: int = 1) -> np.ndarray:
    """``out = sum_k W[k] * u[shift_k]`` on interior nodes, accumulated in :data:`OFFSETS` order.

    ``W`` has shape (9, nx, ny) and ``out`` shape (nx - 2, ny - 2).
    """
    nx, ny = u.shape
    Wi = W[:, 1:-1, 1:-1]
    out[...] = Wi[0] * u[1:-1, 1:-1]
    for k in range(1, 9):
        di, dj = OFFSETS[k]
        out += Wi[k] * u[1 + di:nx - 1 + di, 1 + dj:ny - 1 + dj]
    return out
