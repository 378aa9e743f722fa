"""Geodesic shooting and numerical checks of the drifted Laplacian comparison bound

    Delta_X r <= (n - 1) sn'_{-K}(r) / sn_{-K}(r) + Lambda
              <= (n - 1) / r + (n - 1) sqrt(K) + Lambda.

``Delta_X r`` is computed by AD on a closed-form distance where the chart
provides one, and otherwise (surfaces) from the scalar Jacobi equation
``j'' + K j = 0`` along the shot geodesic: ``Delta r = j'/j``.  A third path,
finite differences of shot distances, exists for cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry as geo
from . import jets as jm
from .errors import ComparisonUnavailable, DomainError, TruncatedPathError, UsageError
from .fields import closed_form
from . import operators as op

__all__ = [
    "sn_minus_k",
    "GeodesicPath",
    "shoot_geodesic",
    "unit_directions",
    "connecting_geodesic",
    "distance",
    "drifted_laplacian_of_distance",
    "measure_curvature_and_drift",
    "ComparisonReport",
    "comparison_check",
    "geodesic_equation_residual",
]

SERIES_SWITCH = 1e-4


def sn_minus_k(K: float, t):
    """``(sn_{-K}(t), sn'_{-K}(t))``: ``t`` for ``K = 0``, ``sinh(sqrt(K) t)/sqrt(K)`` otherwise.

    For ``sqrt(K) t`` below ``1e-4`` a three-term series is used, so the map is
    continuous as ``K -> 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise UsageError("sn_{-K} is evaluated at t > 0 only")
    if K < 0:
        raise UsageError("K must be nonnegative")
    rk = math.sqrt(K)
    s = rk * t
    small = s < SERIES_SWITCH
    s2 = s * s
    with np.errstate(over="ignore"):
        val = np.where(small, t * (1.0 + s2 / 6.0 + s2 * s2 / 120.0), np.sinh(s) / (rk if rk > 0 else 1.0))
        der = np.where(small, 1.0 + s2 / 2.0 + s2 * s2 / 24.0, np.cosh(s))
    return val, der


def _sn_ratio(K: float, t):
    """``sn'/sn``, stable for large ``t`` (``sqrt(K) coth(sqrt(K) t)``)."""
    t = np.asarray(t, dtype=float)
    rk = math.sqrt(K)
    s = rk * t
    val, der = sn_minus_k(K, t)
    big = s > 20.0
    return np.where(big, rk / np.tanh(np.where(big, s, 1.0)), der / val)


@dataclass
class GeodesicPath:
    """Samples ``(t, point, unit velocity)`` of an arclength-parameterized geodesic."""

    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    origin: np.ndarray
    length: float
    renorm_drift: float = 0.0
    jacobi: Optional[np.ndarray] = None  # (j, j') along the path, surfaces only
    truncated: bool = False

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[:, -1]

    def rows(self):
        for k in range(self.t.size):
            yield (float(self.t[k]), *self.points[:, k].tolist(), *self.velocities[:, k].tolist())


def _christoffel_fn(m: geo.ChartManifold):
    if m.flat:
        return lambda P: np.zeros((m.dim,) * 3 + P.shape[1:])
    if m.christoffel_fast is not None:
        return m.christoffel_fast
    return lambda P: geo.christoffel(m, P)


def _curvature_fn(m: geo.ChartManifold):
    if m.dim != 2:
        return None
    if m.gauss_curvature_fast is not None:
        return m.gauss_curvature_fast
    return lambda P: geo.gauss_curvature(m, P)


def _inside(m: geo.ChartManifold, P: np.ndarray) -> np.ndarray:
    lo = m.domain[:, 0].reshape((-1,) + (1,) * (P.ndim - 1)) + m.margin
    hi = m.domain[:, 1].reshape((-1,) + (1,) * (P.ndim - 1)) - m.margin
    return np.all((P > lo) & (P < hi), axis=0)


def _unit(m: geo.ChartManifold, P: np.ndarray, V: np.ndarray) -> np.ndarray:
    G = geo.metric_at(m, P, check=False)
    nrm = np.sqrt(np.einsum("i...,ij...,j...->...", V, G, V))
    return V / nrm, nrm


def _shoot_batch(m: geo.ChartManifold, o, V0, length: float, step: float, with_jacobi: bool = False,
                 keep: bool = True):
    """RK4 for ``x' = v``, ``v'^k = -Gamma^k_ij v^i v^j`` over a batch of initial velocities.

    Velocities are renormalized to unit length after every step.  Returns
    ``(t, X, V, J, alive, drift)`` where ``alive[b]`` is False once path ``b``
    left the chart.
    """
    n = m.dim
    o = np.asarray(o, dtype=float)
    V = np.array(V0, dtype=float).reshape(n, -1)
    B = V.shape[1]
    X = np.repeat(o[:, None], B, axis=1)
    V, _ = _unit(m, X, V)
    nsteps = max(1, int(math.ceil(length / step - 1e-9)))
    h = length / nsteps
    gam = _christoffel_fn(m)
    kfn = _curvature_fn(m) if with_jacobi else None
    if with_jacobi and kfn is None:
        raise ComparisonUnavailable("Jacobi-field distance Laplacian is implemented for surfaces only")

    def rhs(x, v, j, jp):
        acc = -np.einsum("kij...,i...,j...->k...", gam(x), v, v)
        if kfn is None:
            return v, acc, None, None
        return v, acc, jp, -kfn(x) * j

    J = np.zeros(B) if with_jacobi else None
    Jp = np.ones(B) if with_jacobi else None
    ts = [0.0]
    Xs, Vs, Js = [X.copy()], [V.copy()], [np.stack([J, Jp])] if with_jacobi else []
    alive = np.ones(B, dtype=bool)
    drift = 0.0
    for s in range(nsteps):
        k1 = rhs(X, V, J, Jp)
        x2, v2 = X + 0.5 * h * k1[0], V + 0.5 * h * k1[1]
        if not np.all(_inside(m, x2)):
            alive &= _inside(m, x2)
            break
        k2 = rhs(x2, v2, None if J is None else J + 0.5 * h * k1[2], None if J is None else Jp + 0.5 * h * k1[3])
        x3, v3 = X + 0.5 * h * k2[0], V + 0.5 * h * k2[1]
        if not np.all(_inside(m, x3)):
            alive &= _inside(m, x3)
            break
        k3 = rhs(x3, v3, None if J is None else J + 0.5 * h * k2[2], None if J is None else Jp + 0.5 * h * k2[3])
        x4, v4 = X + h * k3[0], V + h * k3[1]
        if not np.all(_inside(m, x4)):
            alive &= _inside(m, x4)
            break
        k4 = rhs(x4, v4, None if J is None else J + h * k3[2], None if J is None else Jp + h * k3[3])
        Xn = X + h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        Vn = V + h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if not np.all(_inside(m, Xn)):
            alive &= _inside(m, Xn)
            break
        if J is not None:
            J, Jp = (J + h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]),
                     Jp + h / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]))
        X = Xn
        V, nrm = _unit(m, X, Vn)
        drift = max(drift, float(np.max(np.abs(nrm - 1.0))))
        if keep or s == nsteps - 1:
            ts.append((s + 1) * h)
            Xs.append(X.copy())
            Vs.append(V.copy())
            if J is not None:
                Js.append(np.stack([J, Jp]))
    return (np.array(ts), np.stack(Xs, axis=-1), np.stack(Vs, axis=-1),
            np.stack(Js, axis=-1) if Js else None, alive, drift)


def shoot_geodesic(m: geo.ChartManifold, o, v0, length: float, step: float = 1e-3,
                   with_jacobi: bool = False) -> GeodesicPath:
    """Integrate the geodesic from ``o`` with initial direction ``v0`` (normalized in ``g``)."""
    o = m.check_point(o)
    if length <= 0 or step <= 0:
        raise UsageError("length and step must be positive")
    if length > m.injectivity_radius:
        raise UsageError(f"length {length} exceeds the declared injectivity radius {m.injectivity_radius}")
    t, X, V, J, alive, drift = _shoot_batch(m, o, np.asarray(v0, dtype=float).reshape(-1, 1), length, step,
                                            with_jacobi)
    path = GeodesicPath(t, X[:, 0], V[:, 0], o, float(t[-1]), drift, None if J is None else J[:, 0], not alive[0])
    if not alive[0] or t[-1] < length * (1 - 1e-12):
        path.truncated = True
        raise TruncatedPathError(f"geodesic left the chart after arclength {t[-1]:.6g}", partial_path=path)
    return path


def unit_directions(m: geo.ChartManifold, o, count: int) -> np.ndarray:
    """``count`` g-unit tangent vectors at ``o`` equally spaced in angle (surfaces) or the
    coordinate directions and their negatives (higher dimensions)."""
    o = np.asarray(o, dtype=float)
    G = geo.metric_at(m, o)
    L = np.linalg.cholesky(G)
    if m.dim == 2:
        ang = 2 * np.pi * np.arange(count) / count
        E = np.stack([np.cos(ang), np.sin(ang)])
    else:
        E = np.concatenate([np.eye(m.dim), -np.eye(m.dim)], axis=1)[:, :count]
    # g-orthonormal frame: columns of L^-T
    return np.linalg.solve(L.T, E)


def geodesic_equation_residual(m: geo.ChartManifold, path: GeodesicPath) -> np.ndarray:
    """``|x'' + Gamma(x')(x')|`` at interior samples, with ``x''`` by central differences."""
    t, X = path.t, path.points
    h = np.diff(t)
    acc = (X[:, 2:] - 2 * X[:, 1:-1] + X[:, :-2]) / (h[None, 1:] * h[None, :-1])
    vel = (X[:, 2:] - X[:, :-2]) / (h[None, 1:] + h[None, :-1])
    gam = _christoffel_fn(m)(X[:, 1:-1])
    res = acc + np.einsum("kij...,i...,j...->k...", gam, vel, vel)
    return np.sqrt(np.sum(res**2, axis=0))


# -----------------------------------------------------------------------------
# boundary-value problem and distance
# -----------------------------------------------------------------------------

def _segment_length(m, o, p, samples: int = 257) -> float:
    s = np.linspace(0.0, 1.0, samples)
    P = o[:, None] + (p - o)[:, None] * s[None, :]
    G = geo.metric_at(m, P, check=False)
    d = p - o
    speed = np.sqrt(np.einsum("i,ij...,j->...", d, G, d))
    return float(np.trapezoid(speed, s))


@dataclass
class _Shot:
    theta: float
    miss: float
    arclength: float


def connecting_geodesic(m: geo.ChartManifold, o, p, step: float = 5e-3, tol: float = 1e-10,
                        max_iter: int = 200, scan: int = 64) -> tuple:
    """Initial angle and length of the geodesic from ``o`` to ``p`` on a surface.

    For each angle the geodesic is shot past ``p`` and the signed chart miss at
    its closest approach is recorded; the sign change in a scan of ``scan``
    angles is refined by Illinois false position until ``|miss| <= tol``.
    Returns ``(theta, length, GeodesicPath)``.
    """
    if m.dim != 2:
        raise ComparisonUnavailable("geodesic boundary-value solve is implemented for surfaces")
    o = m.check_point(o)
    p = m.check_point(p)
    if np.allclose(o, p, atol=1e-14, rtol=0):
        raise UsageError("p must differ from o")
    L = np.linalg.cholesky(geo.metric_at(m, o))
    reach = min(1.05 * _segment_length(m, o, p) + 10 * step, m.injectivity_radius)

    def shots(thetas):
        thetas = np.atleast_1d(thetas)
        V = np.linalg.solve(L.T, np.stack([np.cos(thetas), np.sin(thetas)]))
        t, X, Vs, _, _, _ = _shoot_batch(m, o, V, reach, step)
        out = []
        for b, th in enumerate(thetas):
            Xb, Vb = X[:, b], Vs[:, b]
            d2 = np.sum((Xb - p[:, None]) ** 2, axis=0)
            k = int(np.argmin(d2))
            k = min(max(k, 1), t.size - 2)
            # refine the closest approach on the cubic Hermite interpolant of [t_{k-1}, t_{k+1}]
            s = _hermite_min(t[k - 1:k + 2], Xb[:, k - 1:k + 2], Vb[:, k - 1:k + 2], p, m)
            pos, vel = _hermite_eval(t, Xb, Vb, s, m)
            cross = vel[0] * (p[1] - pos[1]) - vel[1] * (p[0] - pos[0])
            miss = math.copysign(float(np.hypot(*(p - pos))), cross)
            out.append(_Shot(float(th), miss, s))
        return out

    # angle of p - o in the orthonormal frame at o
    w = L.T @ (p - o)
    base = math.atan2(w[1], w[0])
    thetas = base + 2 * np.pi * (np.arange(scan) / scan - 0.5)
    scanned = shots(thetas)
    best = None
    for a, b in zip(scanned, scanned[1:] + scanned[:1]):
        if a.miss == 0.0:
            best = (a, a)
            break
        if np.sign(a.miss) != np.sign(b.miss) and abs(a.miss) + abs(b.miss) < 4 * reach:
            # a sign flip next to a near-hit, not across the antipodal branch
            score = min(abs(a.miss), abs(b.miss))
            if best is None or score < min(abs(best[0].miss), abs(best[1].miss)):
                best = (a, b)
    if best is None:
        raise ComparisonUnavailable("no bracketing pair of shooting angles")
    a, b = best
    if b.theta < a.theta:
        b = _Shot(b.theta + 2 * np.pi, b.miss, b.arclength)
    side = 0
    cur = a if abs(a.miss) < abs(b.miss) else b
    for _ in range(max_iter):
        if abs(cur.miss) <= tol:
            break
        fa, fb = a.miss, b.miss
        th = (a.theta * fb - b.theta * fa) / (fb - fa)
        if not (min(a.theta, b.theta) < th < max(a.theta, b.theta)):
            th = 0.5 * (a.theta + b.theta)
        cur = shots(th)[0]
        if np.sign(cur.miss) == np.sign(fa):
            a = cur
            if side == -1:
                b = _Shot(b.theta, 0.5 * b.miss, b.arclength)
            side = -1
        else:
            b = cur
            if side == 1:
                a = _Shot(a.theta, 0.5 * a.miss, a.arclength)
            side = 1
        if abs(b.theta - a.theta) < 1e-15:
            break
    else:
        raise ComparisonUnavailable(f"boundary-value shooting did not converge in {max_iter} iterations")
    if abs(cur.miss) > tol:
        raise ComparisonUnavailable(f"boundary-value shooting stalled at miss {abs(cur.miss):.3e}")
    v = np.linalg.solve(L.T, np.array([math.cos(cur.theta), math.sin(cur.theta)]))
    path = shoot_geodesic(m, o, v, cur.arclength, step=min(step, cur.arclength / 4), with_jacobi=m.dim == 2)
    return cur.theta, cur.arclength, path


def _hermite_basis(tau):
    return (2 * tau**3 - 3 * tau**2 + 1, tau**3 - 2 * tau**2 + tau, -2 * tau**3 + 3 * tau**2, tau**3 - tau**2)


def _hermite_eval(t, X, V, s, m):
    k = int(np.clip(np.searchsorted(t, s) - 1, 0, t.size - 2))
    h = t[k + 1] - t[k]
    tau = (s - t[k]) / h
    # chart velocity equals the stored tangent (x' = v)
    h00, h10, h01, h11 = _hermite_basis(tau)
    pos = h00 * X[:, k] + h10 * h * V[:, k] + h01 * X[:, k + 1] + h11 * h * V[:, k + 1]
    d00, d10, d01, d11 = (6 * tau**2 - 6 * tau, 3 * tau**2 - 4 * tau + 1, -6 * tau**2 + 6 * tau, 3 * tau**2 - 2 * tau)
    vel = (d00 * X[:, k] + d10 * h * V[:, k] + d01 * X[:, k + 1] + d11 * h * V[:, k + 1]) / h
    return pos, vel


def _hermite_min(t3, X3, V3, p, m):
    """Arclength of the closest chart approach to ``p`` over three consecutive samples."""
    lo, hi = t3[0], t3[-1]
    f = lambda s: float(np.sum((_hermite_eval(t3, X3, V3, s, m)[0] - p) ** 2))
    # golden-section search; the squared distance is unimodal on this short window
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(80):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def distance(m: geo.ChartManifold, o, p, **kw) -> float:
    """Riemannian distance from ``o`` to ``p`` (closed form when the chart has one)."""
    o = np.asarray(o, dtype=float)
    p = m.check_point(p)
    if m.distance_fn is not None:
        return float(jm.value(m.distance_fn(o, list(p))))
    return connecting_geodesic(m, o, p, **kw)[1]


# -----------------------------------------------------------------------------
# Delta_X r
# -----------------------------------------------------------------------------

def _distance_field(m: geo.ChartManifold, o):
    o = np.asarray(o, dtype=float)
    return closed_form(lambda *c: m.distance_fn(o, c), name="r")


def _fd_distance_laplacian(m, x, o, p, h, **kw):
    from .solver.stencil import OFFSETS, stencil_weights

    W = stencil_weights(m, x, p, h, h)
    acc = 0.0
    for k, (di, dj) in enumerate(OFFSETS):
        acc = acc + W[k] * distance(m, o, p + np.array([di * h, dj * h]), **kw)
    return float(acc)


def drifted_laplacian_of_distance(m: geo.ChartManifold, x: geo.VectorFieldSpec, o, p,
                                  method: str = "auto", step: float = 1e-3, fd_h: float = 1e-2) -> float:
    """``Delta_X r`` at ``p`` with ``r = d(o, .)``.

    ``method``: ``"closed"`` (AD on the chart's distance formula), ``"jacobi"``
    (boundary-value geodesic plus the Jacobi equation; surfaces), ``"fd"`` (nine-point
    finite differences of boundary-value distances) or ``"auto"``.
    """
    o = m.check_point(o)
    p = m.check_point(p)
    if np.allclose(o, p, atol=1e-14, rtol=0):
        raise UsageError("Delta_X r is singular at the base point")
    if method == "auto":
        method = "closed" if m.distance_fn is not None else "jacobi"
    if method == "closed":
        if m.distance_fn is None:
            raise ComparisonUnavailable(f"{m.kind} chart has no closed-form distance")
        return float(op.drifted_laplacian(m, x, _distance_field(m, o), p))
    if method == "jacobi":
        _, r, path = connecting_geodesic(m, o, p, step=max(step, 5e-3))
        if r >= m.injectivity_radius:
            raise ComparisonUnavailable("point beyond the declared injectivity radius")
        j, jp = path.jacobi[:, -1]
        X = x.components_at(m, path.endpoint)
        G = geo.metric_at(m, path.endpoint)
        return float(jp / j - X @ G @ path.velocities[:, -1])
    if method == "fd":
        return _fd_distance_laplacian(m, x, o, p, fd_h)
    raise UsageError(f"unknown method {method!r}")


# -----------------------------------------------------------------------------
# comparison check
# -----------------------------------------------------------------------------

def measure_curvature_and_drift(m: geo.ChartManifold, x: geo.VectorFieldSpec, box, count: int = 41):
    """``K = max(0, -min eig_g(Ric_X) / (n - 1))`` and ``Lambda = max |X|_g`` over a grid of ``box``."""
    grid = geo.box_grid(box, count)
    low, at = geo.min_eig_ric_x_on_grid(m, x, grid, relative=True)
    K = max(0.0, -low / (m.dim - 1))
    lam = float(np.max(geo.norm_x(m, x, grid)))
    return {"K": K, "Lambda": lam, "min_eig_ric_x": low, "argmin": at.tolist(), "grid": [count] * m.dim,
            "box": np.asarray(box).tolist()}


@dataclass
class ComparisonReport:
    rows: list
    K: float
    Lambda: float
    measured: dict
    min_slack_sharp: float
    min_slack_simple: float
    tol: float = 1e-6
    columns: tuple = ("r", "direction", "delta_x_r", "sharp_bound", "simplified_bound",
                      "slack_sharp", "slack_simplified")
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.min_slack_sharp >= -self.tol and self.min_slack_simple >= -self.tol


def comparison_check(m: geo.ChartManifold, x: geo.VectorFieldSpec, o, radii, directions: int = 16,
                     step: float = 1e-3, K: Optional[float] = None, Lambda: Optional[float] = None,
                     scan_count: int = 41, r_min: float = 1e-2, tol: float = 1e-6) -> ComparisonReport:
    """Evaluate both forms of the comparison bound at the endpoints of geodesics of length
    ``r`` in ``directions`` directions; ``K`` and ``Lambda`` are measured unless given."""
    o = m.check_point(o)
    radii = sorted(float(r) for r in radii)
    if radii[0] < r_min:
        raise UsageError(f"radii must be at least {r_min}")
    if radii[-1] >= m.injectivity_radius:
        raise ComparisonUnavailable("radius beyond the declared injectivity radius")
    measured = measure_curvature_and_drift(m, x, m.cover(o, radii[-1]), scan_count)
    K = measured["K"] if K is None else K
    lam = measured["Lambda"] if Lambda is None else Lambda
    n = m.dim
    V0 = unit_directions(m, o, directions)
    jac = m.distance_fn is None
    if jac and n != 2:
        raise ComparisonUnavailable("no closed-form distance and not a surface")
    rows = []
    for r in radii:
        t, X, V, J, alive, _ = _shoot_batch(m, o, V0, r, step, with_jacobi=jac, keep=False)
        if not np.all(alive) or abs(t[-1] - r) > 1e-9 * r:
            raise ComparisonUnavailable(f"a geodesic of length {r} left the chart")
        ends = X[:, :, -1]
        if jac:
            lap = J[1, :, -1] / J[0, :, -1]
            Xc = x.components_at(m, ends)
            G = geo.metric_at(m, ends, check=False)
            dlx = lap - np.einsum("i...,ij...,j...->...", Xc, G, V[:, :, -1])
        else:
            dlx = op.drifted_laplacian(m, x, _distance_field(m, o), ends)
        sharp = (n - 1) * _sn_ratio(K, r) + lam
        simple = (n - 1) / r + (n - 1) * math.sqrt(K) + lam
        for k in range(directions):
            rows.append((r, k, float(dlx[k]), float(sharp), float(simple),
                         float(sharp - dlx[k]), float(simple - dlx[k])))
    arr = np.array([row[5:] for row in rows])
    return ComparisonReport(rows, K, lam, measured, float(arr[:, 0].min()), float(arr[:, 1].min()), tol,
                            extra={"method": "jacobi" if jac else "closed", "step": step})
