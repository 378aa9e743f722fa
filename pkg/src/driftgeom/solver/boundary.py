"""Dirichlet boundary presets for the 2-D solver."""
from __future__ import annotations

import numpy as np

from ..errors import UsageError

__all__ = ["Boundary", "boundary_preset", "PRESETS"]


class Boundary:
    """A vectorized ``(x, y) -> value`` map that remembers its preset name and parameters."""

    def __init__(self, fn, preset: str, params: dict):
        self.fn = fn
        self.preset = preset
        self.params = params

    def __call__(self, x, y):
        return self.fn(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def __repr__(self):
        return f"Boundary({self.preset!r}, {self.params})"


def _constant(value: float = 1.0):
    return lambda x, y: np.full(np.broadcast(x, y).shape, float(value))


def _exp_x(scale: float = 1.0, shift: float = 0.0):
    return lambda x, y: shift + np.exp(scale * x) + 0.0 * y


def _linear(c: float = 0.0, a: float = 1.0, b: float = 0.0):
    return lambda x, y: c + a * x + b * y


def _harmonic_exp_cos(offset: float = 3.0, scale: float = 1.0):
    # offset + exp(x/scale) cos(y/scale) is Euclidean-harmonic
    return lambda x, y: offset + np.exp(x / scale) * np.cos(y / scale)


PRESETS = {
    "constant": _constant,
    "exp_x": _exp_x,
    "linear": _linear,
    "exp_cos": _harmonic_exp_cos,
}


def boundary_preset(name: str, **params) -> Boundary:
    try:
        make = PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown boundary preset {name!r}; expected one of {sorted(PRESETS)} or file") from None
    try:
        fn = make(**params)
    except TypeError as exc:
        raise UsageError(f"bad parameters for boundary preset {name!r}: {exc}") from None
    return Boundary(fn, name, dict(params))
