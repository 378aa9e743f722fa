"""Finite-difference Newton solver for ``Delta_X u + F(u) = 0`` on chart rectangles."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import geometry as geo
from ..errors import DomainError, NonConvergenceError, PositivityError, UsageError
from ..fields import Nonlinearity, ScalarField, grid_field
from .kernels import apply_stencil
from .krylov import bicgstab
from .stencil import stencil_weights

__all__ = ["GridSolution", "solve_elliptic_2d", "log_gradient_sup", "grid_axes", "coons_patch"]

MIN_STEP = 2.0**-20


@dataclass
class GridSolution:
    """Nodal solution on a chart rectangle with its residual and solver history."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    boundary: dict
    residual_inf: float
    iterations: int
    converged: bool
    manifold: geo.ChartManifold
    drift: geo.VectorFieldSpec
    nl: Nonlinearity
    weights: np.ndarray
    history: list = field(default_factory=list)
    linear_iterations: list = field(default_factory=list)

    @property
    def h(self) -> tuple:
        return (self.xs[1] - self.xs[0], self.ys[1] - self.ys[0])

    @property
    def mesh(self) -> np.ndarray:
        return np.stack(np.meshgrid(self.xs, self.ys, indexing="ij"))

    def residual(self, backend: Optional[str] = None) -> np.ndarray:
        """Discrete ``Delta_X u + F(u)`` on interior nodes, recomputed from the stored values."""
        out = apply_stencil(self.weights, self.values, backend=backend)
        return out + self.nl.f(self.values[1:-1, 1:-1])

    def recompute_residual_inf(self) -> float:
        return float(np.max(np.abs(self.residual()), initial=0.0))

    def as_field(self, positive: bool = False) -> ScalarField:
        return grid_field(self.values, (self.xs, self.ys), name="solution", positive=positive)

    def summary(self) -> dict:
        return {
            "residual_inf": self.residual_inf,
            "iterations": self.iterations,
            "converged": self.converged,
            "min_value": float(self.values.min()),
            "max_value": float(self.values.max()),
            "grid": [len(self.xs), len(self.ys)],
            "h": [float(v) for v in self.h],
        }


def grid_axes(rect, h=None, cells=None):
    """Node coordinates for ``rect = [[x0, x1], [y0, y1]]`` from a spacing or a cell count."""
    rect = np.asarray(rect, dtype=float)
    if rect.shape != (2, 2) or np.any(rect[:, 1] <= rect[:, 0]):
        raise UsageError(f"bad rectangle {rect.tolist()}")
    if (h is None) == (cells is None):
        raise UsageError("give exactly one of h and cells")
    if cells is not None:
        counts = np.broadcast_to(np.asarray(cells, dtype=int), (2,))
    else:
        hs = np.broadcast_to(np.asarray(h, dtype=float), (2,))
        ratio = (rect[:, 1] - rect[:, 0]) / hs
        counts = np.rint(ratio).astype(int)
        if np.any(np.abs(ratio - counts) > 1e-9 * np.maximum(1.0, ratio)):
            raise UsageError(f"spacing {hs.tolist()} does not divide the rectangle {rect.tolist()} evenly")
    if np.any(counts < 2):
        raise UsageError("need at least two cells per axis")
    return tuple(np.linspace(lo, hi, c + 1) for (lo, hi), c in zip(rect, counts))


def coons_patch(edges: np.ndarray) -> np.ndarray:
    """Transfinite interpolation of the boundary values of ``edges`` into the interior."""
    nx, ny = edges.shape
    s = np.linspace(0.0, 1.0, nx)[:, None]
    t = np.linspace(0.0, 1.0, ny)[None, :]
    W, E = edges[0][None, :], edges[-1][None, :]
    S, N = edges[:, 0][:, None], edges[:, -1][:, None]
    bilinear = ((1 - s) * (1 - t) * edges[0, 0] + s * (1 - t) * edges[-1, 0]
                + (1 - s) * t * edges[0, -1] + s * t * edges[-1, -1])
    out = (1 - s) * W + s * E + (1 - t) * S + t * N - bilinear
    out[0], out[-1], out[:, 0], out[:, -1] = edges[0], edges[-1], edges[:, 0], edges[:, -1]
    return out


def solve_elliptic_2d(m: geo.ChartManifold, x: geo.VectorFieldSpec, nl: Nonlinearity, rect,
                      boundary: Callable, h=None, newton_tol: float = 1e-8, max_iter: int = 50,
                      cells=None, require_positive: bool = False, threads: int = 1,
                      backend: Optional[str] = None, max_linear_iter: int = 20000) -> GridSolution:
    """Solve ``Delta_X u + F(u) = 0`` with Dirichlet data ``boundary(x, y)`` on a chart rectangle.

    Damped Newton with step halving down to ``2**-20``; each Newton system is
    solved matrix-free by Jacobi-preconditioned BiCGSTAB to
    ``max(1e-2 * newton_tol, 1e-12)``.
    """
    if m.dim != 2:
        raise UsageError("the finite-difference solver needs a 2-dimensional chart")
    xs, ys = grid_axes(rect, h, cells)
    P = np.stack(np.meshgrid(xs, ys, indexing="ij"))
    try:
        m.check_point(P)
    except DomainError as exc:
        raise DomainError(f"rectangle leaves the chart domain: {exc}") from None
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    W = np.ascontiguousarray(stencil_weights(m, x, P, hx, hy))

    edges = np.zeros(P.shape[1:])
    bvals = np.asarray(boundary(P[0], P[1]), dtype=float) * np.ones(P.shape[1:])
    edges[0], edges[-1], edges[:, 0], edges[:, -1] = bvals[0], bvals[-1], bvals[:, 0], bvals[:, -1]
    if require_positive and np.min(np.concatenate([edges[0], edges[-1], edges[:, 0], edges[:, -1]])) <= 0:
        raise PositivityError("boundary data must be strictly positive")
    u = np.ascontiguousarray(coons_patch(edges))
    if require_positive and np.min(u) <= 0:
        u[1:-1, 1:-1] = np.maximum(u[1:-1, 1:-1], np.min(edges[edges > 0]))

    work = np.empty((len(xs) - 2, len(ys) - 2))
    padded = np.zeros_like(u)

    def residual(vals):
        return apply_stencil(W, vals, work, threads, backend) + nl.f(vals[1:-1, 1:-1])

    lin_tol = max(1e-2 * newton_tol, 1e-12)
    history, lin_hist = [], []
    R = residual(u)
    rinf = float(np.max(np.abs(R), initial=0.0))
    history.append(rinf)
    it = 0
    while rinf > newton_tol:
        if it >= max_iter:
            raise NonConvergenceError(f"Newton did not reach {newton_tol:g} in {max_iter} iterations "
                                      f"(residual {rinf:.3e})", last_iterate=u, history=history)
        fprime = nl.f_prime(u[1:-1, 1:-1])
        diag = W[0, 1:-1, 1:-1] + fprime
        inv_diag = np.where(diag != 0.0, 1.0 / np.where(diag != 0.0, diag, 1.0), 1.0)

        def jac(v):
            padded[1:-1, 1:-1] = v
            return apply_stencil(W, padded, np.empty_like(v), threads, backend) + fprime * v

        delta, lits, _ = bicgstab(jac, -R, inv_diag, lin_tol, max_linear_iter)
        lin_hist.append(lits)
        step = 1.0
        saw_positive = False
        while step >= MIN_STEP:
            trial = u.copy()
            trial[1:-1, 1:-1] += step * delta
            if require_positive and np.min(trial) <= 0:
                step *= 0.5
                continue
            saw_positive = True
            Rt = residual(trial).copy()
            rt = float(np.max(np.abs(Rt)))
            if rt < rinf:
                u, R, rinf = trial, Rt, rt
                break
            step *= 0.5
        else:
            if require_positive and not saw_positive:
                raise PositivityError("every damped Newton step left the positive cone")
            raise NonConvergenceError(f"Newton stagnated at residual {rinf:.3e}", last_iterate=u, history=history)
        it += 1
        history.append(rinf)
    return GridSolution(xs, ys, u, {"kind": getattr(boundary, "preset", "callable"),
                                    "params": getattr(boundary, "params", {})},
                        rinf, it, True, m, x, nl, W, history, lin_hist)


def _grid_gradient_sq(m: geo.ChartManifold, sol: GridSolution):
    u = sol.values
    hx, hy = sol.h
    du = np.stack([(u[2:, 1:-1] - u[:-2, 1:-1]) / (2 * hx), (u[1:-1, 2:] - u[1:-1, :-2]) / (2 * hy)])
    pts = sol.mesh[:, 1:-1, 1:-1]
    ginv = geo.inverse_metric_at(m, pts)
    return np.einsum("i...,ij...,j...->...", du, ginv, du), u[1:-1, 1:-1], pts


def log_gradient_sup(sol: GridSolution, subrect=None, mask: Optional[Callable] = None):
    """``max |grad u|_g^2 / u^2`` over interior nodes in ``subrect`` (and ``mask(x, y)`` if given).

    Returns ``(value, argmax point)``; ties go to the first node in C order.
    """
    q, u, pts = _grid_gradient_sq(sol.manifold, sol)
    sel = np.ones(u.shape, dtype=bool)
    if subrect is not None:
        r = np.asarray(subrect, dtype=float)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(r))))
        sel &= (pts[0] >= r[0, 0] - tol) & (pts[0] <= r[0, 1] + tol)
        sel &= (pts[1] >= r[1, 0] - tol) & (pts[1] <= r[1, 1] + tol)
    if mask is not None:
        sel &= np.asarray(mask(pts[0], pts[1]), dtype=bool)
    if not np.any(sel):
        raise UsageError("no interior nodes in the requested region")
    if np.any(u[sel] <= 0):
        raise PositivityError("log-gradient needs a positive solution on the region")
    ratio = np.where(sel, q / np.where(sel, u, 1.0) ** 2, -np.inf)
    k = int(np.argmax(ratio.ravel()))
    return float(ratio.ravel()[k]), pts.reshape(2, -1)[:, k].copy()
