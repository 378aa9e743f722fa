"""Quantitative side of the gradient estimate: the bound bracket, the depressed cubic,
the Harnack factor, the growth functional and the numerical experiments built on
the finite-difference solver."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from . import jets as jm
from . import operators as op
from .errors import DomainError, NonConvergenceError, NumericError, PositivityError, UsageError
from .fields import Nonlinearity, ScalarField, closed_form, zero_nl
from .solver.fd2d import log_gradient_sup, solve_elliptic_2d

__all__ = [
    "EstimateParams",
    "CubicCoeffs",
    "gradient_bound_bracket",
    "cubic_from_params",
    "depressed_cubic_discriminant",
    "depressed_cubic_roots",
    "harnack_factor",
    "omega_growth",
    "empirical_constant",
    "log_gradient_field",
    "inscribed_chart_radius",
    "ball_mask",
    "metric_shell",
    "gradient_estimate_experiment",
    "harnack_experiment",
    "liouville_decay_experiment",
    "fit_decay_exponent",
]


@dataclass(frozen=True)
class EstimateParams:
    """``(n, K, Lambda, alpha, beta, R, Cn)``; ``Cn`` defaults to ``8 n``, ``R = inf`` is the global mode."""

    n: int
    K: float = 0.0
    Lambda: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    R: float = math.inf
    Cn: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise UsageError("n must be an integer >= 2")
        if self.K < 0 or self.Lambda < 0 or self.beta < 0:
            raise UsageError("K, Lambda and beta must be nonnegative")
        if not self.R > 0:
            raise UsageError("R must be positive (or inf)")
        if self.Cn is None:
            object.__setattr__(self, "Cn", 8.0 * self.n)
        if not self.Cn > 0:
            raise UsageError("Cn must be positive")

    @property
    def alpha_tilde(self) -> float:
        return max(self.alpha + 1.5 * (self.n - 1) * self.K, 0.0)

    @property
    def gamma(self) -> float:
        return math.sqrt(self.alpha_tilde + self.beta)

    def as_dict(self) -> dict:
        return asdict(self)


def gradient_bound_bracket(params: EstimateParams, raw: bool = False) -> float:
    """``Cn * (max(alpha + 3/2 (n-1) K, 0) + beta + Lambda^2 + 1/R^2)``; ``raw`` omits ``Cn``."""
    inv_r2 = 0.0 if math.isinf(params.R) else 1.0 / params.R**2
    bracket = params.alpha_tilde + params.beta + params.Lambda**2 + inv_r2
    return bracket if raw else params.Cn * bracket


@dataclass(frozen=True)
class CubicCoeffs:
    """``t^3 + p t + q``; ``provenance`` records ``(beta, Lambda, A)`` when built from parameters."""

    p: float
    q: float
    A: float = 0.0
    provenance: Optional[dict] = None


def cubic_from_params(params: EstimateParams, A: Optional[float] = None) -> CubicCoeffs:
    """``p = -(4 beta + 8 Lambda^2 + A)``, ``q = -4 Lambda beta``; ``A`` defaults to
    ``2n alpha~ + 2n Lambda^2`` (the part that does not depend on ``R``)."""
    n = params.n
    if A is None:
        A = 2 * n * params.alpha_tilde + 2 * n * params.Lambda**2
    if A < 0:
        raise UsageError("A must be nonnegative")
    p = -(4 * params.beta + 8 * params.Lambda**2 + A)
    q = -4 * params.Lambda * params.beta
    return CubicCoeffs(p, q, A, {"beta": params.beta, "Lambda": params.Lambda, "A": A})


def depressed_cubic_discriminant(c: CubicCoeffs) -> float:
    return -(4 * c.p**3 + 27 * c.q**2)


def depressed_cubic_roots(c: CubicCoeffs, tol: float = 1e-12) -> tuple:
    """Ascending real roots of ``t^3 + p t + q`` by the trigonometric formula."""
    p, q = c.p, c.q
    if q == 0.0:
        if p > 0:
            raise DomainError("t^3 + p t has complex roots for p > 0")
        s = math.sqrt(-p)
        return (-s, 0.0, s)
    disc = depressed_cubic_discriminant(c)
    if p >= 0 or disc < -tol:
        raise DomainError(f"cubic has complex roots (discriminant {disc:.3e})")
    arg = 3 * math.sqrt(3) * q / (2 * p * math.sqrt(-p))
    if abs(arg) > 1 + tol:
        raise DomainError(f"arcsin argument {arg!r} outside [-1, 1]")
    theta = math.asin(min(1.0, max(-1.0, arg))) / 3.0
    amp = -2.0 * math.sqrt(-p / 3.0)
    roots = sorted(amp * math.sin(theta + 2 * ell * math.pi / 3) for ell in (-1, 0, 1))
    if q <= 0:
        cap = 2.0 / math.sqrt(3.0) * math.sqrt(-p)
        if roots[-1] > cap + tol:
            raise NumericError(f"largest root {roots[-1]!r} exceeds {cap!r}")
    return tuple(roots)


def harnack_factor(params: EstimateParams, distance: float, C1: Optional[float] = None, C2: float = 1.0) -> float:
    """``C2 exp(C1 (gamma + Lambda) d)``; ``C1`` defaults to ``sqrt(Cn)``."""
    if distance < 0:
        raise UsageError("distance must be nonnegative")
    C1 = math.sqrt(params.Cn) if C1 is None else C1
    if C1 <= 0 or C2 <= 0:
        raise UsageError("C1 and C2 must be positive")
    return C2 * math.exp(C1 * (params.gamma + params.Lambda) * distance)


# -----------------------------------------------------------------------------
# balls inside charts
# -----------------------------------------------------------------------------

def _polar(o, s, shells=24, angles=96):
    rho = s * np.linspace(0.0, 1.0, shells)[1:]
    ang = 2 * np.pi * np.arange(angles) / angles
    pts = o[:, None, None] + np.stack([np.outer(rho, np.cos(ang)), np.outer(rho, np.sin(ang))])
    return np.concatenate([o[:, None], pts.reshape(2, -1)], axis=1)


def inscribed_chart_radius(m: geo.ChartManifold, o, R: float) -> float:
    """Largest chart radius ``s`` with ``s * sqrt(max metric eigenvalue on the chart disc) <= R``,
    so the chart disc of radius ``s`` lies inside the metric ball ``B_R(o)``."""
    o = np.asarray(o, dtype=float)
    if m.flat:
        return float(R)

    def lam(s):
        G = geo.metric_at(m, _polar(o, s), check=False)
        return float(np.max(geo.sym_eigvalsh(G)[-1]))

    lo, hi = 0.0, R / math.sqrt(max(lam(1e-9), 1e-300))
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid * math.sqrt(lam(mid)) <= R:
            lo = mid
        else:
            hi = mid
    return lo


def metric_shell(o, r: float, distance: Callable, angles: int = 256, iters: int = 60) -> np.ndarray:
    """Chart points at distance ``r`` from ``o`` along ``angles`` rays, by bisection on each ray.

    Assumes ``distance`` increases along chart rays from ``o``.
    """
    o = np.asarray(o, dtype=float)
    ang = 2 * np.pi * np.arange(angles) / angles
    dirs = np.stack([np.cos(ang), np.sin(ang)])
    lo = np.zeros(angles)
    hi = np.full(angles, float(r))
    for _ in range(200):
        short = np.asarray(distance(o[:, None] + hi * dirs)) < r
        if not np.any(short):
            break
        hi = np.where(short, 2 * hi, hi)
    else:
        raise DomainError(f"no chart point at distance {r} along some ray")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = np.asarray(distance(o[:, None] + mid * dirs)) < r
        lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
    return o[:, None] + 0.5 * (lo + hi) * dirs


def ball_mask(m: geo.ChartManifold, o, R: float, distance: Optional[Callable] = None):
    """A vectorized predicate selecting (a subset of) the metric ball ``B_R(o)`` and its description.

    ``distance`` (chart points ``(2, ...)`` -> distance from ``o``) overrides the chart's own
    distance function; without either, the inscribed chart disc is used.
    """
    o = np.asarray(o, dtype=float)
    if distance is not None:
        return (lambda x, y: np.asarray(distance(np.stack([x, y]))) <= R,
                {"ball": "exact (supplied distance)", "R": R})
    if m.distance_fn is not None:
        return (lambda x, y: np.asarray(jm.value(m.distance_fn(o, [x, y]))) <= R,
                {"ball": "exact", "R": R})
    s = inscribed_chart_radius(m, o, R)
    return (lambda x, y: (x - o[0]) ** 2 + (y - o[1]) ** 2 <= s * s,
            {"ball": "inscribed chart disc", "R": R, "chart_radius": s})


# -----------------------------------------------------------------------------
# growth functional and constants
# -----------------------------------------------------------------------------

def omega_growth(u: Callable, radii, m: Optional[geo.ChartManifold] = None, o=None, shells: int = 32,
                 angles: int = 256) -> dict:
    """Slope of ``sup_{B_R} log(u + 1)`` against ``R`` over the largest half of ``radii``.

    ``u`` is a vectorized function of chart points ``(2, N)`` (a :class:`ScalarField` works).
    Balls are sampled on a polar grid; on non-flat charts the chart disc inscribed
    in the metric ball is used.
    """
    radii = np.asarray(sorted(radii), dtype=float)
    if radii.size < 3:
        raise UsageError("omega_growth needs at least three radii")
    if np.any(np.diff(radii) <= 0):
        raise UsageError("radii must be strictly increasing")
    m = geo.euclidean(2) if m is None else m
    o = np.zeros(m.dim) if o is None else np.asarray(o, dtype=float)
    sups = []
    for R in radii:
        s = inscribed_chart_radius(m, o, R)
        pts = _polar(o, s, shells, angles)
        vals = np.asarray(u(pts), dtype=float)
        if np.any(vals <= 0):
            raise PositivityError("omega_growth needs a positive function")
        sups.append(float(np.max(np.log1p(vals))))
    k = max(2, int(math.ceil(radii.size / 2)))
    xs, ys = radii[-k:], np.array(sups[-k:])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return {"omega": slope, "radii": radii.tolist(), "sup_log": sups, "fit_radii": xs.tolist()}


def empirical_constant(experiments) -> dict:
    """``max measured / bracket`` over ``(measured sup |grad log u|^2, bracket without Cn)`` pairs."""
    experiments = list(experiments)
    if not experiments:
        raise UsageError("no experiments")
    ratios = []
    for measured, bracket in experiments:
        if not bracket > 0:
            raise UsageError("brackets must be positive")
        ratios.append(measured / bracket)
    return {"ratios": ratios, "Cn_min": max(ratios)}


def log_gradient_field(m: geo.ChartManifold, u: ScalarField) -> tuple:
    """The fields ``w = log u`` and ``Q = |grad w|^2`` for a positive closed-form ``u``."""
    w = closed_form(lambda *c: jm.log(u.jet(c)), name=f"log {u.name}", loss=u.loss)
    return w, op.grad_norm_sq_field(m, w)


def fit_decay_exponent(R, Q) -> float:
    """Least-squares slope of ``log Q`` against ``log R``."""
    R, Q = np.asarray(R, dtype=float), np.asarray(Q, dtype=float)
    if np.any(Q <= 0):
        return -math.inf
    return float(np.polyfit(np.log(R), np.log(Q), 1)[0])


# -----------------------------------------------------------------------------
# experiments
# -----------------------------------------------------------------------------

def _measure_hypotheses(m, x, box, count=41):
    from .geodesics import measure_curvature_and_drift
    return measure_curvature_and_drift(m, x, box, count)


def gradient_estimate_experiment(m: geo.ChartManifold, x: geo.VectorFieldSpec, nl: Nonlinearity, o, R: float,
                                 boundary, cells: int = 128, Cn: Optional[float] = None,
                                 newton_tol: float = 1e-8, threads: int = 1, rect=None) -> dict:
    """Solve on a chart rectangle containing ``B_2R(o)``, measure ``sup |grad log u|^2`` on
    ``B_R(o)`` and compare with ``Cn * bracket`` built from measured ``K``, ``Lambda``."""
    o = np.asarray(o, dtype=float)
    rect = m.cover(o, 2 * R) if rect is None else np.asarray(rect, dtype=float)
    sol = solve_elliptic_2d(m, x, nl, rect, boundary, cells=cells, newton_tol=newton_tol,
                            require_positive=True, threads=threads)
    mask, ball = ball_mask(m, o, R)
    measured, at = log_gradient_sup(sol, mask=mask)
    hyp = _measure_hypotheses(m, x, rect)
    params = EstimateParams(m.dim, hyp["K"], hyp["Lambda"], nl.alpha, nl.beta, R, Cn)
    raw = gradient_bound_bracket(params, raw=True)
    return {
        "R": R, "rect": rect.tolist(), "cells": cells, "ball": ball,
        "measured": measured, "argmax": at.tolist(),
        "K": hyp["K"], "Lambda": hyp["Lambda"], "min_eig_ric_x": hyp["min_eig_ric_x"],
        "alpha": nl.alpha, "beta": nl.beta, "bracket": raw, "Cn": params.Cn,
        "bound": params.Cn * raw, "ratio": measured / raw,
        "passed": measured <= params.Cn * raw,
        "solver": sol.summary(),
    }


def harnack_experiment(m: geo.ChartManifold, x: geo.VectorFieldSpec, rect, boundary, distance: float,
                       h: float = 1 / 64, C1: Optional[float] = None, C2: float = 1.0,
                       Lambda: Optional[float] = None, nl: Optional[Nonlinearity] = None) -> dict:
    """``sup u / inf u`` of a discrete solution against the Harnack factor with measured
    ``gamma`` and ``Lambda`` over ``rect``."""
    nl = zero_nl() if nl is None else nl
    sol = solve_elliptic_2d(m, x, nl, rect, boundary, h=h, require_positive=True)
    hyp = _measure_hypotheses(m, x, rect)
    lam = hyp["Lambda"] if Lambda is None else Lambda
    params = EstimateParams(m.dim, hyp["K"], lam, nl.alpha, nl.beta)
    factor = harnack_factor(params, distance, C1, C2)
    ratio = float(sol.values.max() / sol.values.min())
    return {"sup_over_inf": ratio, "factor": factor, "slack": factor / ratio, "gamma": params.gamma,
            "Lambda": lam, "K": hyp["K"], "distance": distance,
            "C1": math.sqrt(params.Cn) if C1 is None else C1, "C2": C2, "solver": sol.summary()}


def liouville_decay_experiment(m: geo.ChartManifold, x: geo.VectorFieldSpec, R_list, o=None,
                               boundary_factory: Optional[Callable] = None, lambda_profile: Optional[Callable] = None,
                               cells: int = 128, newton_tol: float = 1e-8, threads: int = 1,
                               shells=(1.0, 2.0, 3.0), distance: Optional[Callable] = None) -> dict:
    """For each ``R`` solve ``Delta_X u = 0`` on a chart rectangle containing ``B_2R`` with the
    boundary ``boundary_factory(R)`` and record ``Q_sup = sup |grad log u|^2`` over ``B_{R/2}``.

    Hypotheses are measured first: ``min eig Ric_X`` on the largest rectangle and
    ``|X| <= lambda_profile(r)`` on the sample shells.  ``distance`` maps chart points
    ``(2, ...)`` to their distance from ``o``; it defines the shells and the balls.
    """
    from .solver.boundary import boundary_preset

    o = np.zeros(m.dim) if o is None else np.asarray(o, dtype=float)
    R_list = sorted(float(r) for r in R_list)
    if boundary_factory is None:
        def boundary_factory(R):
            return boundary_preset("linear", c=1.0, a=0.5 / (2 * R), b=0.0)
    big = m.cover(o, 2 * R_list[-1])
    low, at = geo.min_eig_ric_x_on_grid(m, x, geo.box_grid(big, 41))
    hyp = {"min_eig_ric_x": low, "argmin": at.tolist(), "ric_x_nonnegative": low >= -1e-9}
    if distance is None and m.distance_fn is not None:
        def distance(P):
            return np.asarray(jm.value(m.distance_fn(o, list(P))))
    if lambda_profile is not None:
        worst = -math.inf
        for r in shells:
            if distance is None:
                ang = 2 * np.pi * np.arange(256) / 256
                s = inscribed_chart_radius(m, o, r)
                pts = o[:, None] + s * np.stack([np.cos(ang), np.sin(ang)])
            else:
                pts = metric_shell(o, r, distance)
            worst = max(worst, float(np.max(geo.norm_x(m, x, pts) - lambda_profile(r))))
        hyp["lambda_profile_excess"] = worst
        hyp["lambda_profile_ok"] = worst <= 1e-9
    rows, Q = [], []
    for R in R_list:
        rect = m.cover(o, 2 * R)
        bnd = boundary_factory(R)
        try:
            sol = solve_elliptic_2d(m, x, zero_nl(), rect, bnd, cells=cells, newton_tol=newton_tol,
                                    require_positive=True, threads=threads)
        except NonConvergenceError as exc:
            exc.partial_report = {"rows": rows, "hypotheses": hyp}
            raise
        mask, ball = ball_mask(m, o, R / 2, distance)
        q, where = log_gradient_sup(sol, mask=mask)
        Q.append(q)
        rows.append({"R": R, "Q_sup": q, "argmax": where.tolist(), "rect": rect.tolist(), "ball": ball,
                     "boundary": {"preset": getattr(bnd, "preset", "callable"), "params": getattr(bnd, "params", {})},
                     "solver": sol.summary()})
    decreasing = all(b < a for a, b in zip(Q, Q[1:]))
    return {"rows": rows, "R": R_list, "Q_sup": Q, "strictly_decreasing": decreasing,
            "decay_exponent": fit_decay_exponent(R_list, Q), "hypotheses": hyp, "cells": cells}
