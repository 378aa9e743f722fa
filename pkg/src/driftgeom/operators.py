"""Differential operators on scalar fields: gradient, Hessian, ``Delta``, ``Delta_X``,
the drifted Bochner residual and the structural checks on ``F``.

Closed-form fields are differentiated with jets; grid fields use second-order
central stencils (the drifted Laplacian reuses the solver's nine-point weights,
so it reproduces solver residuals exactly).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from . import jets as jm
from .errors import DomainError, UsageError
from .fields import Nonlinearity, ScalarField, closed_form, log_sample

__all__ = [
    "gradient",
    "hessian",
    "laplacian",
    "drifted_laplacian",
    "grad_norm_sq_field",
    "bochner_terms",
    "bochner_residual",
    "StructuralReport",
    "check_structural_f",
    "fit_structural_constants",
]


# -----------------------------------------------------------------------------
# jet-level building blocks
# -----------------------------------------------------------------------------

class _Local:
    """Jets of the metric, its inverse, Christoffel symbols and ``u`` around a point."""

    def __init__(self, m: geo.ChartManifold, u: ScalarField, p, order: int):
        self.m = m
        self.p = m.check_point(p)
        geo.metric_at(m, self.p)
        self.P = jm.variables(self.p, order)
        self.G = m.metric_fn(*self.P)
        self.ginv = geo.inverse_metric_jets(m, self.G)
        n = m.dim
        self.gam = geo._zeros_like_nested(n, 3) if m.flat else geo.christoffel_jets(m, self.G, self.ginv, n)
        self.U = u.jet(self.P)
        self.dU = [jm.d(self.U, i) for i in range(n)]

    def hess(self):
        n = self.m.dim
        return [[jm.d(self.dU[i], j) - sum(self.gam[k][i][j] * self.dU[k] for k in range(n))
                 for j in range(n)] for i in range(n)]

    def grad(self):
        n = self.m.dim
        return [sum(self.ginv[i][j] * self.dU[j] for j in range(n)) for i in range(n)]

    def laplacian(self):
        H = self.hess()
        n = self.m.dim
        return sum(self.ginv[i][j] * H[i][j] for i in range(n) for j in range(n))

    def drifted_laplacian(self, x: geo.VectorFieldSpec):
        X = x.evaluate(self.m, self.P)
        return self.laplacian() - sum(X[k] * self.dU[k] for k in range(self.m.dim))

    def shape(self):
        return self.p.shape[1:]


def _out(v, shape):
    return np.broadcast_to(np.asarray(jm.value(v), dtype=float), shape).copy()


def _order(u: ScalarField, x: geo.VectorFieldSpec | None, derivs: int) -> int:
    need = derivs + u.loss
    if x is not None:
        need = max(need, x.loss)
    return max(need, 1)


# -----------------------------------------------------------------------------
# grid path
# -----------------------------------------------------------------------------

def _grid_first(u: ScalarField, idx):
    hx, hy = u.spacing
    i, j = idx
    v = u.values
    return np.stack([(v[i + 1, j] - v[i - 1, j]) / (2 * hx), (v[i, j + 1] - v[i, j - 1]) / (2 * hy)])


def _grid_second(u: ScalarField, idx):
    hx, hy = u.spacing
    i, j = idx
    v = u.values
    dxx = (v[i + 1, j] - 2 * v[i, j] + v[i - 1, j]) / hx**2
    dyy = (v[i, j + 1] - 2 * v[i, j] + v[i, j - 1]) / hy**2
    dxy = (v[i + 1, j + 1] - v[i + 1, j - 1] - v[i - 1, j + 1] + v[i - 1, j - 1]) / (4 * hx * hy)
    return np.array([[dxx, dxy], [dxy, dyy]])


def _grid_christoffel(m, p):
    if m.flat:
        return np.zeros((2, 2, 2) + p.shape[1:])
    if m.christoffel_fast is not None:
        return m.christoffel_fast(p)
    return geo.christoffel(m, p)


# -----------------------------------------------------------------------------
# public operators
# -----------------------------------------------------------------------------

def gradient(m: geo.ChartManifold, u: ScalarField, p) -> np.ndarray:
    """Riemannian gradient ``g^ij d_j u`` at ``p`` (shape ``(n, *batch)``)."""
    if u.kind == "grid":
        p = m.check_point(p)
        du = _grid_first(u, u.node_index(p, interior=True))
        return np.einsum("ij...,j...->i...", geo.inverse_metric_at(m, p), du)
    L = _Local(m, u, p, _order(u, None, 1))
    return np.stack([_out(c, L.shape()) for c in L.grad()])


def hessian(m: geo.ChartManifold, u: ScalarField, p) -> np.ndarray:
    """Covariant Hessian ``d_i d_j u - Gamma^k_ij d_k u``."""
    if u.kind == "grid":
        p = m.check_point(p)
        idx = u.node_index(p, interior=True)
        du = _grid_first(u, idx)
        return _grid_second(u, idx) - np.einsum("kij...,k...->ij...", _grid_christoffel(m, p), du)
    L = _Local(m, u, p, _order(u, None, 2))
    H = L.hess()
    return np.stack([np.stack([_out(h, L.shape()) for h in row]) for row in H])


def laplacian(m: geo.ChartManifold, u: ScalarField, p) -> np.ndarray:
    return drifted_laplacian(m, geo.zero_field(m.dim), u, p)


def drifted_laplacian(m: geo.ChartManifold, x: geo.VectorFieldSpec, u: ScalarField, p) -> np.ndarray:
    """``tr_g Hess u - g(X, grad u)``."""
    if u.kind == "grid":
        from .solver.stencil import OFFSETS, stencil_weights

        if m.dim != 2:
            raise UsageError("grid fields live on 2-dimensional charts")
        p = m.check_point(p)
        i, j = u.node_index(p, interior=True)
        hx, hy = u.spacing
        W = stencil_weights(m, x, p, hx, hy)
        v = u.values
        acc = W[0] * v[i, j]
        for k in range(1, 9):
            di, dj = OFFSETS[k]
            acc = acc + W[k] * v[i + di, j + dj]
        return acc
    L = _Local(m, u, p, _order(u, x, 2))
    return _out(L.drifted_laplacian(x), L.shape())


def grad_norm_sq_field(m: geo.ChartManifold, u: ScalarField) -> ScalarField:
    """The closed-form field ``p -> |grad u|_g^2(p)``."""
    if u.kind != "closed_form":
        raise UsageError("needs a closed-form field")
    n = m.dim

    def fn(*coords):
        U = u.jet(coords)
        dU = [jm.d(U, i) for i in range(n)]
        ginv = geo.inverse_metric_jets(m, m.metric_fn(*coords))
        return sum(ginv[i][j] * dU[i] * dU[j] for i in range(n) for j in range(n))

    return closed_form(fn, name=f"|grad {u.name}|^2", loss=u.loss + 1)


def bochner_terms(m: geo.ChartManifold, x: geo.VectorFieldSpec, u: ScalarField, p) -> dict:
    """The two sides of the drifted Bochner identity at ``p``.

    ``lhs`` is ``Delta_X`` applied to the field ``|grad u|^2`` (halved);
    ``rhs`` is ``|Hess u|^2 + g(grad u, grad Delta_X u) + Ric_X(grad u, grad u)``.
    """
    if u.kind != "closed_form":
        raise UsageError("the Bochner residual needs a closed-form field (fourth derivatives)")
    lhs = 0.5 * drifted_laplacian(m, x, grad_norm_sq_field(m, u), p)

    n = m.dim
    order = max(3 + u.loss, 2 + x.loss)
    L = _Local(m, u, p, order)
    H = L.hess()
    ginv = L.ginv
    hess_sq = sum(ginv[i][k] * ginv[j][l] * H[i][j] * H[k][l]
                  for i in range(n) for j in range(n) for k in range(n) for l in range(n))
    dlap = L.drifted_laplacian(x)
    # g(grad u, grad f) = g^ij d_i u d_j f
    cross = sum(ginv[i][j] * L.dU[i] * jm.d(dlap, j) for i in range(n) for j in range(n))
    grad = L.grad()
    R = geo.ric_x_jets(m, x, L.P, L.G, ginv)
    ricx = sum(R[i][j] * grad[i] * grad[j] for i in range(n) for j in range(n))
    shape = L.shape()
    parts = {"hess_sq": _out(hess_sq, shape), "cross": _out(cross, shape), "ric_x": _out(ricx, shape)}
    rhs = parts["hess_sq"] + parts["cross"] + parts["ric_x"]
    return {"lhs": lhs, "rhs": rhs, **parts}


def bochner_residual(m: geo.ChartManifold, x: geo.VectorFieldSpec, u: ScalarField, p, relative: bool = False):
    """``LHS - RHS`` of the drifted Bochner identity; ``relative=True`` divides by ``max(1, |LHS|, |RHS|)``."""
    t = bochner_terms(m, x, u, p)
    res = t["lhs"] - t["rhs"]
    if relative:
        return np.abs(res) / np.maximum(1.0, np.maximum(np.abs(t["lhs"]), np.abs(t["rhs"])))
    return res


# -----------------------------------------------------------------------------
# structural conditions on F
# -----------------------------------------------------------------------------

@dataclass
class StructuralReport:
    alpha_excess: float
    beta_excess: float
    passed: bool
    tol: float = 1e-12

    def as_dict(self):
        return {"alpha_excess": self.alpha_excess, "beta_excess": self.beta_excess,
                "passed": self.passed, "tol": self.tol}


def _sample(sample):
    t = log_sample() if sample is None else np.asarray(sample, dtype=float).ravel()
    if t.size == 0:
        raise UsageError("empty structural sample")
    if np.any(t <= 0):
        raise UsageError("structural sample points must be positive")
    return t


def check_structural_f(nl: Nonlinearity, sample=None, tol: float = 1e-12) -> StructuralReport:
    """Sample maxima of ``(t F' - F - alpha t)/t`` and ``(|F| - beta t)/t``; pass iff both ``<= tol``."""
    t = _sample(sample)
    F, Fp = nl.f(t), nl.f_prime(t)
    a = float(np.max((t * Fp - F - nl.alpha * t) / t))
    b = float(np.max((np.abs(F) - nl.beta * t) / t))
    return StructuralReport(a, b, a <= tol and b <= tol, tol)


def fit_structural_constants(nl: Nonlinearity, sample=None) -> tuple:
    """Smallest ``(alpha, beta)`` consistent with the sample: sup of ``(tF' - F)/t`` and ``|F|/t``."""
    t = _sample(sample)
    F, Fp = nl.f(t), nl.f_prime(t)
    return float(np.max((t * Fp - F) / t)), float(np.max(np.abs(F) / t))
