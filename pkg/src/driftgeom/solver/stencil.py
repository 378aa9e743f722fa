"""Nine-point stencil weights for the chart-coefficient form of ``Delta_X``.

In a chart, ``Delta_X u = a^ij d_i d_j u + b^k d_k u`` with ``a = g^-1`` and
``b^k = -g^ij Gamma^k_ij - X^k``.  Central differences turn this into nine
weights per node, ordered as :data:`OFFSETS`.
"""
from __future__ import annotations

import numpy as np

from .. import geometry as geo

__all__ = ["OFFSETS", "chart_coefficients", "stencil_weights"]

# (di, dj) with i along the first chart axis and j along the second
OFFSETS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def chart_coefficients(m: geo.ChartManifold, x: geo.VectorFieldSpec, pts: np.ndarray):
    """Second-order coefficients ``a`` (2, 2, *batch) and first-order ``b`` (2, *batch)."""
    pts = m.check_point(pts)
    a = geo.inverse_metric_at(m, pts)
    if m.flat:
        gam = np.zeros((2, 2, 2) + pts.shape[1:])
    elif m.christoffel_fast is not None:
        gam = m.christoffel_fast(pts)
    else:
        gam = geo.christoffel(m, pts)
    X = x.components_at(m, pts)
    b = -np.einsum("ij...,kij...->k...", a, gam) - X
    return a, b


def stencil_weights(m: geo.ChartManifold, x: geo.VectorFieldSpec, pts: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Weights ``W[k, *batch]`` for the neighbours ``OFFSETS[k]`` at each point."""
    if m.dim != 2:
        raise ValueError("the finite-difference stencil is two-dimensional")
    a, b = chart_coefficients(m, x, pts)
    a11, a12, a22 = a[0, 0], 0.5 * (a[0, 1] + a[1, 0]), a[1, 1]
    W = np.empty((9,) + a11.shape)
    W[0] = -2.0 * a11 / hx**2 - 2.0 * a22 / hy**2
    W[1] = a11 / hx**2 + b[0] / (2.0 * hx)
    W[2] = a11 / hx**2 - b[0] / (2.0 * hx)
    W[3] = a22 / hy**2 + b[1] / (2.0 * hy)
    W[4] = a22 / hy**2 - b[1] / (2.0 * hy)
    cross = a12 / (2.0 * hx * hy)
    W[5] = cross
    W[6] = -cross
    W[7] = -cross
    W[8] = cross
    return W
