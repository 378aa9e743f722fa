"""Quadrature solution of ``u'' - b(x) u' = 0``.

Every solution is ``u(x) = c1 + c2 * int_0^x exp(B(t)) dt`` with
``B(t) = int_0^t b``.  Both integrals are adaptive Gauss-Kronrod with memoized
partial sums; growth quantities are carried in log-space so ``B`` may exceed
the double-precision exponent range.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .. import jets as jm
from ..errors import NumericError, UsageError
from ..fields import ScalarField, closed_form
from ..quadrature import CumulativeIntegral, LogExpCumulative

__all__ = ["ODESolution1D", "solve_ode_1d", "ode_residual"]

EXP_LIMIT = 700.0


class ODESolution1D:
    """The solution field; exposes ``value``, ``derivative``, ``second_derivative`` and log forms."""

    def __init__(self, b: Callable, c1: float, c2: float, x_range, quad_tol: float,
                 b_jet: Optional[Callable] = None, spacing: float = 0.25):
        self.b = b
        self.b_jet = b_jet
        self.c1 = float(c1)
        self.c2 = float(c2)
        self.x_range = tuple(float(v) for v in x_range)
        self.quad_tol = quad_tol
        self.B = CumulativeIntegral(lambda t: np.asarray(b(t), dtype=float) * np.ones_like(t), quad_tol, spacing)
        self.logI = LogExpCumulative(self.B, quad_tol, spacing)

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.x_range
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise UsageError(f"x outside the solution range [{lo}, {hi}]")
        return x

    def integral(self, x) -> np.ndarray:
        """``int_0^x exp(B)``."""
        x = self._check(x)
        log_i = self.logI(x)
        if np.any(log_i > EXP_LIMIT):
            raise NumericError("integral overflows; use the log-space accessors")
        return np.sign(x) * np.exp(log_i)

    def value(self, x) -> np.ndarray:
        return self.c1 + self.c2 * self.integral(x)

    def derivative(self, x) -> np.ndarray:
        x = self._check(x)
        B = self.B(x)
        if np.any(B > EXP_LIMIT):
            raise NumericError("u' overflows; use log_derivative")
        return self.c2 * np.exp(B)

    def second_derivative(self, x) -> np.ndarray:
        x = self._check(x)
        return np.asarray(self.b(x), dtype=float) * self.derivative(x)

    def log_derivative(self, x) -> np.ndarray:
        """``log |u'|``."""
        x = self._check(x)
        if self.c2 == 0.0:
            return np.full(x.shape, -np.inf)
        return np.log(abs(self.c2)) + self.B(x)

    def log_value(self, x) -> np.ndarray:
        """``log u`` for a positive solution, computed without forming ``exp(B)``."""
        x = self._check(x)
        log_i = self.logI(x)
        s = np.sign(x) * np.sign(self.c2)
        term = np.log(abs(self.c2)) + log_i if self.c2 != 0.0 else np.full(x.shape, -np.inf)
        if self.c1 == 0.0:
            if np.any((s <= 0) & np.isfinite(term)) or np.any(~np.isfinite(term)):
                raise NumericError("u is not positive at a requested point")
            return term
        if self.c1 < 0:
            raise NumericError("log-space evaluation needs c1 >= 0")
        lc1 = np.log(self.c1)
        with np.errstate(invalid="ignore", divide="ignore"):
            neg = lc1 + np.log1p(-np.exp(term - lc1))
        out = np.where(s > 0, np.logaddexp(lc1, term), np.where(np.isfinite(term), neg, lc1))
        if np.any(~np.isfinite(out)):
            raise NumericError("u is not positive at a requested point")
        return out

    def log_gradient(self, x) -> np.ndarray:
        """``u'/u`` through ``exp(log u' - log u)``; requires ``c2 > 0`` and ``u > 0``."""
        if self.c2 <= 0:
            raise NumericError("log-gradient form needs c2 > 0")
        return np.exp(self.log_derivative(x) - self.log_value(x))

    def as_field(self, name: str = "u") -> ScalarField:
        """A jet-capable closed-form field; derivatives come from ``u' = c2 exp(B)`` and ``B' = b``."""
        if self.b_jet is None:
            raise UsageError("as_field needs a jet-capable b")
        c2 = self.c2

        def B_jet(t):
            return jm.antiderivative(t, self.B, self.b_jet)

        def u_jet(x):
            return jm.antiderivative(x, lambda v: self.value(v), lambda t: c2 * jm.exp(B_jet(t)))

        return closed_form(u_jet, name=name)


def solve_ode_1d(b: Callable, c1: float, c2: float, x_range, quad_tol: float = 1e-13,
                 b_jet: Optional[Callable] = None) -> ODESolution1D:
    """Solve ``u'' = b u'`` with ``u(0) = c1`` and ``u'(0) = c2`` on ``x_range``.

    ``b`` must be vectorized over numpy arrays; ``b_jet`` (optional) is a
    jet-capable version used by :meth:`ODESolution1D.as_field`.
    """
    if quad_tol <= 0:
        raise UsageError("quad_tol must be positive")
    lo, hi = x_range
    if not lo < hi:
        raise UsageError("empty x range")
    return ODESolution1D(b, c1, c2, (lo, hi), quad_tol, b_jet)


def ode_residual(sol: ODESolution1D, xs, h: float = 5e-3) -> np.ndarray:
    """Relative residual ``|u'' - b u'| / max(1, |u''|, |b u'|)`` with ``u'``, ``u''`` from
    five-point central differences of the quadrature values ``u``."""
    xs = np.asarray(xs, dtype=float)
    f = [sol.value(xs + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    bu = np.asarray(sol.b(xs), dtype=float) * d1
    return np.abs(d2 - bu) / np.maximum(1.0, np.maximum(np.abs(d2), np.abs(bu)))
