"""Chart geometry: metric, Christoffel symbols, Ricci and Bakry-Emery-Ricci tensors.

Everything is computed from a jet-capable ``metric_fn`` by forward-mode AD
(:mod:`driftgeom.jets`).  Points are arrays of shape ``(n,)`` or ``(n, *batch)``;
results carry the batch axes last, e.g. Christoffel symbols come back as
``(n, n, n, *batch)`` indexed ``[k, i, j]`` for Gamma^k_ij.

A finite-difference path (:func:`christoffel_fd`, :func:`ricci_fd`) exists only to
cross-check the AD path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets as jm
from .errors import DomainError, GeometryError, UsageError

__all__ = [
    "ChartManifold",
    "VectorFieldSpec",
    "TensorAtPoint",
    "euclidean",
    "hyperbolic_halfplane",
    "graph_surface",
    "paraboloid",
    "rotationally_symmetric",
    "zero_field",
    "constant_field",
    "axis_drift",
    "linear_drift",
    "rotation_field",
    "gradient_field",
    "metric_at",
    "inverse_metric_at",
    "christoffel",
    "ricci",
    "gauss_curvature",
    "lie_derivative_metric",
    "ric_x",
    "tensors_at",
    "norm_x",
    "min_eig_ric_x_on_grid",
    "sym_eigvalsh",
    "relative_eigvalsh",
    "box_grid",
    "christoffel_fd",
    "ricci_fd",
]


# -----------------------------------------------------------------------------
# manifolds and vector fields
# -----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChartManifold:
    """A single coordinate chart carrying a Riemannian metric.

    ``metric_fn(*coords)`` returns the metric components as a nested ``n x n``
    list; it must accept floats, arrays and jets.  The optional fast callables
    are closed forms used by the geodesic integrator; they are tested against
    the generic AD path.
    """

    dim: int
    domain: np.ndarray
    metric_fn: Callable
    kind: str
    params: dict = field(default_factory=dict)
    margin: float = 1e-6
    injectivity_radius: float = math.inf
    flat: bool = False
    christoffel_fast: Optional[Callable] = None
    gauss_curvature_fast: Optional[Callable] = None
    distance_fn: Optional[Callable] = None
    ball_cover: Optional[Callable] = None

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[0] != self.dim:
            raise UsageError(f"point has {p.shape[0]} coordinates, chart has dim {self.dim}")
        lo = self.domain[:, 0].reshape((-1,) + (1,) * (p.ndim - 1))
        hi = self.domain[:, 1].reshape((-1,) + (1,) * (p.ndim - 1))
        inside = (p > lo + self.margin) & (p < hi - self.margin)
        if not np.all(inside):
            bad = p.reshape(self.dim, -1)[:, ~inside.reshape(self.dim, -1).all(axis=0)][:, 0]
            raise DomainError(f"point {bad.tolist()} outside {self.kind} chart domain {self.domain.tolist()}")
        return p

    def cover(self, o, radius: float) -> np.ndarray:
        """A chart box containing the metric ball ``B_radius(o)``, clipped to the domain."""
        if self.ball_cover is None:
            raise UsageError(f"{self.kind} chart declares no ball cover")
        box = np.array(self.ball_cover(np.asarray(o, dtype=float), radius), dtype=float)
        box[:, 0] = np.maximum(box[:, 0], self.domain[:, 0] + 2 * self.margin)
        box[:, 1] = np.minimum(box[:, 1], self.domain[:, 1] - 2 * self.margin)
        return box

    def __repr__(self):
        return f"ChartManifold(kind={self.kind!r}, dim={self.dim}, params={self.params})"


@dataclass(frozen=True, eq=False)
class VectorFieldSpec:
    """A drift field given by its contravariant chart components.

    ``components_fn(m, coords)`` returns ``n`` components (jets or plain values);
    ``loss`` is the number of derivative orders the evaluation consumes (1 for
    gradient fields, which differentiate a potential).
    """

    components_fn: Callable
    name: str
    loss: int = 0
    norm_bound: Optional[Callable] = None
    global_bound: Optional[float] = None
    params: dict = field(default_factory=dict)

    def evaluate(self, m: ChartManifold, coords):
        return list(self.components_fn(m, coords))

    def components_at(self, m: ChartManifold, p) -> np.ndarray:
        p = m.check_point(p)
        if self.loss:
            comps = self.evaluate(m, jm.variables(p, self.loss))
        else:
            comps = self.evaluate(m, list(p))
        return np.stack([np.broadcast_to(jm.value(c), p.shape[1:]) for c in comps]).astype(float)

    def __repr__(self):
        return f"VectorFieldSpec({self.name!r}, params={self.params})"


@dataclass
class TensorAtPoint:
    christoffel: np.ndarray
    ricci: np.ndarray
    lie_deriv_metric: np.ndarray
    ric_x: np.ndarray


def _box(domain, n):
    if domain is None:
        return np.array([[-np.inf, np.inf]] * n, dtype=float)
    return np.asarray(domain, dtype=float).reshape(n, 2)


def euclidean(n: int = 2, domain=None) -> ChartManifold:
    def metric(*x):
        return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]

    def christ(p):
        return np.zeros((n, n, n) + np.shape(p)[1:])

    def gauss(p):
        return np.zeros(np.shape(p)[1:])

    def dist(o, coords):
        return jm.sqrt(sum((c - oc) ** 2 for c, oc in zip(coords, o)))

    def cover(o, r):
        return np.stack([o - r, o + r], axis=1)

    return ChartManifold(n, _box(domain, n), metric, "euclidean", {"n": n}, flat=True,
                         christoffel_fast=christ, gauss_curvature_fast=gauss if n == 2 else None,
                         distance_fn=dist, ball_cover=cover)


def hyperbolic_halfplane(curvature: float = 1.0, domain=None) -> ChartManifold:
    """Upper half-plane with ``g = (dx^2 + dy^2) / (curvature * y^2)``; Gauss curvature ``-curvature``."""
    kappa = float(curvature)
    if kappa <= 0:
        raise UsageError("hyperbolic curvature scale must be positive")
    dom = _box(domain if domain is not None else [[-1e3, 1e3], [0.0, 1e3]], 2)

    def metric(x, y):
        c = 1.0 / (kappa * y * y)
        return [[c, 0.0], [0.0, c]]

    def christ(p):
        y = p[1]
        out = np.zeros((2, 2, 2) + y.shape)
        out[0, 0, 1] = out[0, 1, 0] = -1.0 / y
        out[1, 0, 0] = 1.0 / y
        out[1, 1, 1] = -1.0 / y
        return out

    def gauss(p):
        return np.full(np.shape(p)[1:], -kappa)

    def dist(o, coords):
        x, y = coords
        arg = 1.0 + ((x - o[0]) ** 2 + (y - o[1]) ** 2) / (2.0 * o[1] * y)
        return jm.arccosh(arg) / math.sqrt(kappa)

    def cover(o, r):
        s = math.sqrt(kappa) * r
        return np.array([[o[0] - o[1] * math.sinh(s), o[0] + o[1] * math.sinh(s)],
                         [o[1] * math.exp(-s), o[1] * math.exp(s)]])

    return ChartManifold(2, dom, metric, "hyperbolic_halfplane", {"curvature": kappa},
                         christoffel_fast=christ, gauss_curvature_fast=gauss,
                         distance_fn=dist, ball_cover=cover)


def graph_surface(f: Callable, domain=None, name: str = "graph", injectivity_radius: float = math.inf,
                  params: Optional[dict] = None) -> ChartManifold:
    """The graph ``z = f(x, y)`` in R^3 with the induced metric ``I + grad f grad f^T``."""
    dom = _box(domain if domain is not None else [[-100.0, 100.0]] * 2, 2)

    def metric(x, y):
        if isinstance(x, jm.Jet):
            F = f(*jm.variables(np.stack([np.broadcast_to(x.value, x.batch_shape),
                                          np.broadcast_to(y.value, y.batch_shape)]), x.order + 1))
            # re-expand f around the same point one order higher, then shift onto (x, y)
            fx, fy = _recentre(F.d(0), x, y), _recentre(F.d(1), x, y)
        else:
            X = jm.variables(np.stack(np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))), 1)
            F = f(*X)
            fx, fy = F.partial((1, 0)), F.partial((0, 1))
        return [[1.0 + fx * fx, fx * fy], [fx * fy, 1.0 + fy * fy]]

    def second_order(p):
        F = f(*jm.variables(p, 2))
        grad = np.stack([F.partial((1, 0)), F.partial((0, 1))])
        hess = np.array([[F.partial((2, 0)), F.partial((1, 1))], [F.partial((1, 1)), F.partial((0, 2))]])
        return grad, hess

    def christ(p):
        grad, hess = second_order(p)
        w = 1.0 + grad[0] ** 2 + grad[1] ** 2
        return grad[:, None, None] * hess[None, :, :] / w

    def gauss(p):
        grad, hess = second_order(p)
        w = 1.0 + grad[0] ** 2 + grad[1] ** 2
        return (hess[0, 0] * hess[1, 1] - hess[0, 1] ** 2) / w**2

    def cover(o, r):
        # I + grad f grad f^T >= I, so chart distance never exceeds metric distance
        return np.stack([o - r, o + r], axis=1)

    return ChartManifold(2, dom, metric, "graph_surface", dict(params or {}, name=name),
                         injectivity_radius=injectivity_radius, christoffel_fast=christ,
                         gauss_curvature_fast=gauss, ball_cover=cover)


def _recentre(J: jm.Jet, x: jm.Jet, y: jm.Jet) -> jm.Jet:
    """Compose a jet expanded in a pure shift ``(s, t)`` with the jets ``x - x0``, ``y - y0``."""
    hx, hy = x - x.value, y - y.value
    out = 0.0 * hx
    for idx, alpha in enumerate(J.space.multis):
        coef = J.c[idx]
        term = (hx ** alpha[0]) * (hy ** alpha[1]) * coef
        out = out + term
    return out


def paraboloid(domain=None) -> ChartManifold:
    """The paraboloid ``z = x^2 + y^2`` in its global graph chart."""
    return graph_surface(lambda x, y: x * x + y * y, domain, name="paraboloid",
                         params={"f": "x^2+y^2"})


_WARPS = ("sinh", "sin", "linear")


def _warp_series(kind: str, kappa: float, terms: int = 48):
    """Power-series coefficients (in s = rho^2) of (w/rho)^2 and of (1 - (w/rho)^2)/s."""
    sign = {"sinh": 1.0, "sin": -1.0}[kind]
    q = [(sign * kappa) ** k * 2.0 ** (2 * k + 1) / math.factorial(2 * k + 2) for k in range(terms)]
    h = [-c for c in q[1:]]
    return q, h


def _horner(coeffs, s):
    out = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        out = out * s + c
    return out


def rotationally_symmetric(warp: str = "sinh", curvature: float = 1.0, radius: float = 6.0) -> ChartManifold:
    """Model surface ``dr^2 + w(r)^2 dtheta^2`` written in Cartesian coordinates about the pole.

    ``warp`` is one of ``sinh`` (constant curvature ``-curvature``), ``sin``
    (constant curvature ``+curvature``) or ``linear`` (flat).
    """
    if warp not in _WARPS:
        raise UsageError(f"unknown warp {warp!r}; expected one of {_WARPS}")
    kappa = float(curvature)
    if warp == "linear":
        m = euclidean(2, [[-radius, radius]] * 2)
        return ChartManifold(2, m.domain, m.metric_fn, "rotationally_symmetric",
                             {"warp": warp, "curvature": 0.0}, flat=True,
                             christoffel_fast=m.christoffel_fast, gauss_curvature_fast=m.gauss_curvature_fast,
                             distance_fn=m.distance_fn, ball_cover=m.ball_cover)
    inj = math.pi / math.sqrt(kappa) if warp == "sin" else math.inf
    if warp == "sin":
        radius = min(radius, 0.95 * inj)
    q, h = _warp_series(warp, kappa)

    def metric(x, y):
        s = x * x + y * y
        a = _horner(q, s)
        b = _horner(h, s)
        return [[a + b * x * x, b * x * y], [b * x * y, a + b * y * y]]

    def gauss(p):
        return np.full(np.shape(p)[1:], -kappa if warp == "sinh" else kappa)

    def dist(o, coords):
        if np.any(np.asarray(o) != 0.0):
            raise UsageError("closed-form distance only from the pole")
        return jm.sqrt(coords[0] ** 2 + coords[1] ** 2)

    def cover(o, r):
        return np.stack([o - r, o + r], axis=1)

    return ChartManifold(2, np.array([[-radius, radius]] * 2), metric, "rotationally_symmetric",
                         {"warp": warp, "curvature": kappa}, injectivity_radius=inj,
                         gauss_curvature_fast=gauss, distance_fn=dist, ball_cover=cover)


def zero_field(n: int = 2) -> VectorFieldSpec:
    return VectorFieldSpec(lambda m, x: [0.0] * n, "zero", norm_bound=lambda r: 0.0, global_bound=0.0)


def constant_field(direction) -> VectorFieldSpec:
    """Constant chart components; on a Euclidean chart ``|X| = |direction|``."""
    v = [float(c) for c in direction]
    norm = math.sqrt(sum(c * c for c in v))
    return VectorFieldSpec(lambda m, x: list(v), "constant", params={"direction": v},
                           norm_bound=lambda r: norm, global_bound=norm)


def axis_drift(b: Callable, n: int = 2, axis: int = 0, name: str = "axis_drift", params=None) -> VectorFieldSpec:
    """``X = b(x_axis) d/dx_axis`` with ``b`` jet-capable."""
    def comps(m, x):
        out = [0.0] * n
        out[axis] = b(x[axis])
        return out
    return VectorFieldSpec(comps, name, params=dict(params or {}, axis=axis))


def linear_drift(n: int = 2, axis: int = 0) -> VectorFieldSpec:
    return axis_drift(lambda t: 1.0 * t, n, axis, name="linear")


def rotation_field(omega: float = 1.0) -> VectorFieldSpec:
    """``omega * (-y, x)``; a Killing field of the Euclidean plane and not a gradient."""
    return VectorFieldSpec(lambda m, x: [-omega * x[1], omega * x[0]], "rotation", params={"omega": omega})


def gradient_field(phi: Callable, name: str = "gradient", norm_bound=None, params=None) -> VectorFieldSpec:
    """The Riemannian gradient ``g^ij d_j phi`` of a jet-capable potential."""
    def comps(m, x):
        if not isinstance(x[0], jm.Jet):
            x = jm.variables(np.stack(np.broadcast_arrays(*[np.asarray(c, float) for c in x])), 1)
        P = phi(*x)
        dphi = [jm.d(P, i) for i in range(m.dim)]
        ginv = inverse_metric_jets(m, m.metric_fn(*x))
        return [sum(ginv[i][j] * dphi[j] for j in range(m.dim)) for i in range(m.dim)]
    return VectorFieldSpec(comps, name, loss=1, norm_bound=norm_bound, params=dict(params or {}))


# -----------------------------------------------------------------------------
# linear algebra helpers
# -----------------------------------------------------------------------------

def _as_array(nested, batch_shape) -> np.ndarray:
    if isinstance(nested, (list, tuple)):
        return np.stack([_as_array(v, batch_shape) for v in nested])
    return np.broadcast_to(np.asarray(jm.value(nested), dtype=float), batch_shape)


def inverse_metric_jets(m: ChartManifold, G):
    n = m.dim
    if m.flat:
        return [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    if n == 1:
        return [[1.0 / G[0][0]]]
    if n == 2:
        det = G[0][0] * G[1][1] - G[0][1] * G[1][0]
        inv = 1.0 / det
        return [[G[1][1] * inv, -G[0][1] * inv], [-G[1][0] * inv, G[0][0] * inv]]
    # Gauss-Jordan without pivoting; fine for SPD matrices
    A = [list(row) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(G)]
    for c in range(n):
        piv = 1.0 / A[c][c]
        A[c] = [a * piv for a in A[c]]
        for r in range(n):
            if r != c:
                f = A[r][c]
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return [row[n:] for row in A]


def sym_eigvalsh(A: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of symmetric matrices ``A[i, j, *batch]``.

    Closed forms for n <= 3, LAPACK otherwise.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 1:
        return A[0].copy()
    if n == 2:
        a, b, d = A[0, 0], 0.5 * (A[0, 1] + A[1, 0]), A[1, 1]
        mean = 0.5 * (a + d)
        rad = np.hypot(0.5 * (a - d), b)
        return np.stack([mean - rad, mean + rad])
    if n == 3:
        S = 0.5 * (A + np.swapaxes(A, 0, 1))
        q = (S[0, 0] + S[1, 1] + S[2, 2]) / 3.0
        p1 = S[0, 1] ** 2 + S[0, 2] ** 2 + S[1, 2] ** 2
        p2 = (S[0, 0] - q) ** 2 + (S[1, 1] - q) ** 2 + (S[2, 2] - q) ** 2 + 2.0 * p1
        p = np.sqrt(p2 / 6.0)
        safe = np.where(p > 0, p, 1.0)
        B = (S - q * np.eye(3).reshape((3, 3) + (1,) * (S.ndim - 2))) / safe
        detB = (B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
                - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
                + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0]))
        phi = np.arccos(np.clip(detB / 2.0, -1.0, 1.0)) / 3.0
        e_hi = q + 2.0 * p * np.cos(phi)
        e_lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
        e_mid = 3.0 * q - e_hi - e_lo
        out = np.stack([e_lo, e_mid, e_hi])
        return np.sort(np.where(p > 0, out, q), axis=0)
    moved = np.moveaxis(np.moveaxis(A, 0, -1), 0, -1)
    return np.moveaxis(np.linalg.eigvalsh(moved), -1, 0)


def relative_eigvalsh(A: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``A`` relative to the metric ``G`` (eigenvalues of ``G^-1 A``), ascending."""
    n = A.shape[0]
    Am = np.moveaxis(np.moveaxis(np.asarray(A, float), 0, -1), 0, -1)
    Gm = np.moveaxis(np.moveaxis(np.asarray(G, float), 0, -1), 0, -1)
    L = np.linalg.cholesky(Gm)
    Linv = np.linalg.inv(L)
    M = Linv @ Am @ np.swapaxes(Linv, -1, -2)
    M = np.moveaxis(np.moveaxis(M, -1, 0), -1, 0)
    return sym_eigvalsh(M)


def box_grid(box, counts) -> np.ndarray:
    """Meshgrid (``indexing='ij'``) of a box ``[[lo, hi], ...]``, shape ``(n, *counts)``."""
    box = np.asarray(box, dtype=float)
    if np.isscalar(counts):
        counts = [int(counts)] * box.shape[0]
    axes = [np.linspace(lo, hi, c) for (lo, hi), c in zip(box, counts)]
    return np.stack(np.meshgrid(*axes, indexing="ij"))


# -----------------------------------------------------------------------------
# tensors
# -----------------------------------------------------------------------------

def metric_at(m: ChartManifold, p, check: bool = True) -> np.ndarray:
    """Metric components ``g_ij`` at ``p``; verifies symmetry and positive definiteness."""
    p = m.check_point(p)
    G = _as_array(m.metric_fn(*p), p.shape[1:])
    if check:
        if np.max(np.abs(G - np.swapaxes(G, 0, 1)), initial=0.0) > 1e-14 * max(1.0, np.max(np.abs(G))):
            raise GeometryError(f"{m.kind} metric is not symmetric")
        if np.min(sym_eigvalsh(G)) <= 0.0:
            raise GeometryError(f"{m.kind} metric is not positive definite at a queried point")
    return G


def inverse_metric_at(m: ChartManifold, p) -> np.ndarray:
    p = m.check_point(p)
    G = m.metric_fn(*p)
    return _as_array(inverse_metric_jets(m, G), p.shape[1:])


def christoffel_jets(m: ChartManifold, G, ginv, n: int):
    """Gamma^k_ij as nested lists of jets (one order below ``G``)."""
    dG = [[[jm.d(G[i][j], k) for k in range(n)] for j in range(n)] for i in range(n)]
    # first-kind symbols [ij, t] = (d_j g_it + d_i g_jt - d_t g_ij) / 2
    first = [[[0.5 * (dG[i][t][j] + dG[j][t][i] - dG[i][j][t]) for t in range(n)] for j in range(n)] for i in range(n)]
    return [[[sum(ginv[k][t] * first[i][j][t] for t in range(n)) for j in range(n)] for i in range(n)]
            for k in range(n)]


def _zeros_like_nested(n, depth):
    if depth == 1:
        return [0.0] * n
    return [_zeros_like_nested(n, depth - 1) for _ in range(n)]


def _local(m: ChartManifold, p, order: int):
    p = m.check_point(p)
    metric_at(m, p)
    P = jm.variables(p, order)
    G = m.metric_fn(*P)
    ginv = inverse_metric_jets(m, G)
    return p, P, G, ginv


def christoffel(m: ChartManifold, p) -> np.ndarray:
    """Christoffel symbols ``Gamma[k, i, j]`` of the Levi-Civita connection."""
    p, P, G, ginv = _local(m, p, 1)
    if m.flat:
        return np.zeros((m.dim,) * 3 + p.shape[1:])
    return _as_array(christoffel_jets(m, G, ginv, m.dim), p.shape[1:])


def ricci_from_christoffel(Gam, n: int):
    """R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik."""
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            r = 0.0
            for k in range(n):
                r = r + jm.d(Gam[k][i][j], k) - jm.d(Gam[k][i][k], j)
                for l in range(n):
                    r = r + Gam[k][k][l] * Gam[l][i][j] - Gam[k][j][l] * Gam[l][i][k]
            row.append(r)
        out.append(row)
    return out


def ricci_jets(m: ChartManifold, G, ginv):
    n = m.dim
    if m.flat:
        return _zeros_like_nested(n, 2)
    return ricci_from_christoffel(christoffel_jets(m, G, ginv, n), n)


def ricci(m: ChartManifold, p) -> np.ndarray:
    p, P, G, ginv = _local(m, p, 2)
    R = _as_array(ricci_jets(m, G, ginv), p.shape[1:])
    return 0.5 * (R + np.swapaxes(R, 0, 1))


def gauss_curvature(m: ChartManifold, p) -> np.ndarray:
    """Gauss curvature of a 2-dimensional chart, ``g^ij R_ij / 2``."""
    if m.dim != 2:
        raise UsageError("Gauss curvature needs a 2-dimensional chart")
    p, P, G, ginv = _local(m, p, 2)
    R = ricci_jets(m, G, ginv)
    return np.broadcast_to(jm.value(0.5 * sum(ginv[i][j] * R[i][j] for i in range(2) for j in range(2))),
                           p.shape[1:]).copy()


def lie_derivative_jets(m: ChartManifold, x: VectorFieldSpec, P, G, ginv):
    """(L_X g)_ij = nabla_i X_j + nabla_j X_i with X_j = g_jk X^k."""
    n = m.dim
    X = x.evaluate(m, P)
    Gam = _zeros_like_nested(n, 3) if m.flat else christoffel_jets(m, G, ginv, n)
    # (nabla_i X)^k = d_i X^k + Gamma^k_il X^l
    nab = [[jm.d(X[k], i) + sum(Gam[k][i][l] * X[l] for l in range(n)) for k in range(n)] for i in range(n)]
    low = [[sum(G[j][k] * nab[i][k] for k in range(n)) for j in range(n)] for i in range(n)]
    return [[low[i][j] + low[j][i] for j in range(n)] for i in range(n)]


def lie_derivative_metric(m: ChartManifold, x: VectorFieldSpec, p) -> np.ndarray:
    p, P, G, ginv = _local(m, p, 1 + x.loss)
    return _as_array(lie_derivative_jets(m, x, P, G, ginv), p.shape[1:])


def ric_x_jets(m: ChartManifold, x: VectorFieldSpec, P, G, ginv):
    R = ricci_jets(m, G, ginv)
    L = lie_derivative_jets(m, x, P, G, ginv)
    n = m.dim
    return [[R[i][j] + 0.5 * L[i][j] for j in range(n)] for i in range(n)]


def ric_x(m: ChartManifold, x: VectorFieldSpec, p) -> np.ndarray:
    """Bakry-Emery-Ricci tensor ``Ric + L_X g / 2`` in chart components."""
    return tensors_at(m, x, p).ric_x


def tensors_at(m: ChartManifold, x: VectorFieldSpec, p) -> TensorAtPoint:
    p, P, G, ginv = _local(m, p, max(2, 1 + x.loss))
    shape = p.shape[1:]
    n = m.dim
    Gam = _zeros_like_nested(n, 3) if m.flat else christoffel_jets(m, G, ginv, n)
    R = _as_array(ricci_jets(m, G, ginv), shape)
    R = 0.5 * (R + np.swapaxes(R, 0, 1))
    L = _as_array(lie_derivative_jets(m, x, P, G, ginv), shape)
    return TensorAtPoint(christoffel=_as_array(Gam, shape), ricci=R, lie_deriv_metric=L, ric_x=R + 0.5 * L)


def norm_x(m: ChartManifold, x: VectorFieldSpec, p) -> np.ndarray:
    """Pointwise ``|X|_g``."""
    p = m.check_point(p)
    X = x.components_at(m, p)
    G = metric_at(m, p, check=False)
    return np.sqrt(np.einsum("i...,ij...,j...->...", X, G, X))


def min_eig_ric_x_on_grid(m: ChartManifold, x: VectorFieldSpec, grid, relative: bool = False):
    """Smallest eigenvalue of Ric_X over a grid of points ``(n, *shape)`` and where it occurs.

    ``relative=False`` uses the chart-component matrix; ``relative=True`` uses
    eigenvalues relative to ``g``, which is what a bound ``Ric_X >= -(n-1)K``
    refers to.  Ties go to the first point in C order of the grid index.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim < 2 or grid[0].size == 0:
        raise UsageError("empty grid")
    T = tensors_at(m, x, grid)
    if relative:
        eig = relative_eigvalsh(T.ric_x, metric_at(m, grid, check=False))
    else:
        eig = sym_eigvalsh(T.ric_x)
    low = eig[0].reshape(-1)
    k = int(np.argmin(low))
    return float(low[k]), grid.reshape(m.dim, -1)[:, k].copy()


# -----------------------------------------------------------------------------
# finite-difference cross-check path
# -----------------------------------------------------------------------------

def _metric_partials_fd(m: ChartManifold, p: np.ndarray, h: float):
    """First and second metric partials by 4th-order central differences."""
    n = m.dim
    g = lambda q: _as_array(m.metric_fn(*q), ())
    E = np.eye(n)
    d1 = np.zeros((n, n, n))
    d2 = np.zeros((n, n, n, n))
    g0 = g(p)
    for k in range(n):
        ek = E[k] * h
        d1[..., k] = (-g(p + 2 * ek) + 8 * g(p + ek) - 8 * g(p - ek) + g(p - 2 * ek)) / (12 * h)
        d2[..., k, k] = (-g(p + 2 * ek) + 16 * g(p + ek) - 30 * g0 + 16 * g(p - ek) - g(p - 2 * ek)) / (12 * h * h)
        for l in range(k + 1, n):
            el = E[l] * h
            acc = 0.0
            for a, wa in ((1, 8.0), (-1, -8.0), (2, -1.0), (-2, 1.0)):
                for b, wb in ((1, 8.0), (-1, -8.0), (2, -1.0), (-2, 1.0)):
                    acc = acc + wa * wb * g(p + a * ek + b * el)
            d2[..., k, l] = d2[..., l, k] = acc / (144 * h * h)
    return g0, d1, d2


def _richardson_partials(m, p, h):
    a = _metric_partials_fd(m, p, h)
    b = _metric_partials_fd(m, p, h / 2)
    return tuple((16 * y - x) / 15 for x, y in zip(a, b))


def _fd_metric_jets(m: ChartManifold, p, h: float):
    """Order-2 metric jets whose Taylor coefficients come from finite differences."""
    n = m.dim
    g0, d1, d2 = _richardson_partials(m, p, h)
    sp = jm.JetSpace.get(n, 2)
    G = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            c = np.zeros(sp.size)
            c[0] = g0[i, j]
            for k in range(n):
                c[sp.index[tuple(1 if t == k else 0 for t in range(n))]] = d1[i, j, k]
                for l in range(k, n):
                    alpha = tuple((t == k) + (t == l) for t in range(n))
                    c[sp.index[alpha]] = d2[i, j, k, l] / (2.0 if k == l else 1.0)
            G[i][j] = jm.Jet(sp, c)
    return G


def christoffel_fd(m: ChartManifold, p, h: float = 1e-2) -> np.ndarray:
    p = m.check_point(p)
    G = _fd_metric_jets(m, p, h)
    ginv = _generic_inverse(G, m.dim)
    return _as_array(christoffel_jets(m, G, ginv, m.dim), ())


def ricci_fd(m: ChartManifold, p, h: float = 1e-2) -> np.ndarray:
    p = m.check_point(p)
    G = _fd_metric_jets(m, p, h)
    ginv = _generic_inverse(G, m.dim)
    R = _as_array(ricci_from_christoffel(christoffel_jets(m, G, ginv, m.dim), m.dim), ())
    return 0.5 * (R + R.T)


def _generic_inverse(G, n):
    dummy = ChartManifold(n, np.zeros((n, 2)), None, "fd")
    return inverse_metric_jets(dummy, G)
