"""Scalar fields on charts and semilinear nonlinearities ``F``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets as jm
from .errors import DomainError, PositivityError, UsageError

__all__ = [
    "ScalarField",
    "Nonlinearity",
    "closed_form",
    "grid_field",
    "zero_nl",
    "linear_nl",
    "rational_nl",
    "nonlinearity_by_name",
    "log_sample",
]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A function ``u`` on a chart.

    ``kind == "closed_form"``: ``fn(*coords)`` is jet-capable; ``loss`` counts the
    derivative orders ``fn`` consumes internally (a field built from ``grad u``
    has ``loss = 1``).

    ``kind == "grid"``: ``values[i, j]`` sampled at ``axes[0][i], axes[1][j]``.
    """

    kind: str
    fn: Optional[Callable] = None
    values: Optional[np.ndarray] = None
    axes: Optional[tuple] = None
    loss: int = 0
    positivity_claimed: bool = False
    name: str = "u"
    params: dict = field(default_factory=dict)

    @property
    def spacing(self) -> np.ndarray:
        return np.array([ax[1] - ax[0] for ax in self.axes])

    def jet(self, coords):
        """Evaluate on coordinate jets (or plain arrays)."""
        if self.kind != "closed_form":
            raise UsageError("grid fields cannot be evaluated on jets")
        out = self.fn(*coords)
        if self.positivity_claimed and np.any(np.asarray(jm.value(out)) <= 0):
            raise PositivityError(f"field {self.name!r} claimed positive but took a nonpositive value")
        return out

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == "closed_form":
            if self.loss:
                v = jm.value(self.jet(jm.variables(p, self.loss)))
            else:
                v = jm.value(self.jet(list(p)))
            return np.broadcast_to(v, p.shape[1:]).astype(float)
        idx = self.node_index(p)
        v = self.values[idx]
        if self.positivity_claimed and np.any(v <= 0):
            raise PositivityError(f"grid field {self.name!r} claimed positive but has a nonpositive node")
        return v

    def node_index(self, p, interior: bool = False):
        """Indices of the grid nodes at ``p`` (which must sit on nodes)."""
        if self.kind != "grid":
            raise UsageError("node lookup needs a grid field")
        p = np.asarray(p, dtype=float)
        out = []
        for k, ax in enumerate(self.axes):
            h = ax[1] - ax[0]
            i = np.rint((p[k] - ax[0]) / h).astype(int)
            if np.any(np.abs(ax[0] + i * h - p[k]) > 1e-9 * abs(h)) or np.any(i < 0) or np.any(i >= len(ax)):
                raise DomainError("point is not a node of the grid")
            if interior and (np.any(i < 1) or np.any(i > len(ax) - 2)):
                raise DomainError("stencil needs an interior grid node")
            out.append(i)
        return tuple(out)


def closed_form(fn: Callable, name: str = "u", positive: bool = False, loss: int = 0, **params) -> ScalarField:
    return ScalarField("closed_form", fn=fn, loss=loss, positivity_claimed=positive, name=name, params=params)


def grid_field(values, axes, name: str = "u", positive: bool = False) -> ScalarField:
    values = np.asarray(values, dtype=float)
    axes = tuple(np.asarray(a, dtype=float) for a in axes)
    if values.shape != tuple(len(a) for a in axes):
        raise UsageError(f"grid values {values.shape} do not match axes {[len(a) for a in axes]}")
    return ScalarField("grid", values=values, axes=axes, positivity_claimed=positive, name=name)


def log_sample(lo: float = 1e-6, hi: float = 1e6, count: int = 400) -> np.ndarray:
    """Default sample for the structural conditions: log-spaced points of ``[lo, hi]``."""
    return np.logspace(np.log10(lo), np.log10(hi), count)


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """``F`` in ``Delta_X u + F(u) = 0`` with its derivative and structural constants."""

    f: Callable
    f_prime: Callable
    alpha: float
    beta: float
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.beta < 0:
            raise UsageError("beta must be nonnegative")
        if not np.isfinite(self.f(np.array(0.0))):
            raise UsageError(f"nonlinearity {self.name!r} is not finite at 0")

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"

    def derivative_mismatch(self, sample=None) -> float:
        """Max relative gap between ``f_prime`` and a central difference of ``f``."""
        t = log_sample() if sample is None else np.asarray(sample, dtype=float)
        h = 1e-5 * t
        fd = (self.f(t + h) - self.f(t - h)) / (2 * h)
        fp = self.f_prime(t)
        return float(np.max(np.abs(fd - fp) / np.maximum(1.0, np.abs(fp))))


def zero_nl() -> Nonlinearity:
    return Nonlinearity(lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                        lambda t: np.zeros_like(np.asarray(t, dtype=float)), 0.0, 0.0, "zero")


def linear_nl(c: float = 1.0) -> Nonlinearity:
    c = float(c)
    return Nonlinearity(lambda t: c * np.asarray(t, dtype=float),
                        lambda t: np.full_like(np.asarray(t, dtype=float), c), 0.0, abs(c), "linear", {"c": c})


def rational_nl(a: float = 1.0, b: float = 1.0, sigma: float = 1.0) -> Nonlinearity:
    """``F(t) = a t / (t + b)^sigma`` with ``a, b > 0`` and ``sigma >= 0``.

    ``t F' - F = -a sigma t^2 / (t + b)^(sigma + 1) <= 0`` and ``|F| / t <= a / b^sigma``.
    """
    if a <= 0 or b <= 0 or sigma < 0:
        raise UsageError("rational nonlinearity needs a > 0, b > 0, sigma >= 0")

    def f(t):
        t = np.asarray(t, dtype=float)
        return a * t / (t + b) ** sigma

    def fp(t):
        t = np.asarray(t, dtype=float)
        return a / (t + b) ** sigma - a * sigma * t / (t + b) ** (sigma + 1)

    return Nonlinearity(f, fp, 0.0, a / b**sigma, "rational", {"a": a, "b": b, "sigma": sigma})


def nonlinearity_by_name(name: str, **params) -> Nonlinearity:
    if name == "zero":
        return zero_nl()
    if name == "linear":
        return linear_nl(**params)
    if name == "rational":
        return rational_nl(**params)
    raise UsageError(f"unknown nonlinearity {name!r}; expected zero, linear or rational")
