"""Kernel backend selection.

The compiled extension is used when it imports; setting
``DRIFTGEOM_PURE_PYTHON=1`` forces the numpy implementation.  Both produce
bit-identical results.
"""
from __future__ import annotations

import os

import numpy as np

from . import _stencil_py

try:
    from . import _stencil as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _stencil_py.apply_stencil}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled.apply_stencil

if os.environ.get("DRIFTGEOM_PURE_PYTHON") == "1" or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


def available_backends() -> list:
    return sorted(_BACKENDS)


def get_apply(backend: str | None = None):
    name = BACKEND if backend is None else backend
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"stencil backend {name!r} unavailable; have {available_backends()}") from None


def apply_stencil(W, u, out=None, threads: int = 1, backend: str | None = None):
    if out is None:
        out = np.empty((u.shape[0] - 2, u.shape[1] - 2))
    return get_apply(backend)(W, u, out, threads)
