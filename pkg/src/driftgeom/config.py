"""Plain-text ``key = value`` experiment configuration and the named registries it refers to.

Lines are ``key = value``; ``#`` starts a comment; blank lines are ignored.
Recognized keys are listed in :data:`SCHEMA` with their types.
"""
from __future__ import annotations

import math
from typing import Any

import numpy as np

from . import geometry as geo
from .errors import ConfigError, UsageError
from .fields import nonlinearity_by_name

__all__ = ["SCHEMA", "parse_config", "load_config", "build_manifold", "build_drift", "build_nonlinearity",
           "parse_list", "parse_params"]


def parse_list(text: str) -> list:
    parts = [p for p in str(text).replace(";", ",").split(",") if p.strip()]
    return [float(p) for p in parts]


def parse_params(text: str) -> dict:
    """``"a=1, b=2"`` -> ``{"a": 1.0, "b": 2.0}``."""
    out = {}
    for part in str(text).replace(";", ",").split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ValueError(f"expected name=value, got {part.strip()!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        out[k] = _float(v)
    return out


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text: str) -> float:
    v = float(text)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


SCHEMA = {
    "manifold": str,         # euclidean | hyperbolic | paraboloid | rotational
    "dim": int,              # euclidean dimension
    "curvature": _float,     # hyperbolic scale / rotational curvature
    "warp": str,             # rotational: sinh | sin | linear
    "domain": parse_list,    # x0, x1, y0, y1
    "drift": str,            # zero | constant | linear | rotation | grad_phi | axis
    "drift_direction": parse_list,
    "omega": _float,
    "variant": str,          # grad_phi: literal | alternate
    "delta": _float,         # axis drift from the one-dimensional family
    "nl": str,               # zero | linear | rational
    "nl_c": _float,
    "nl_a": _float,
    "nl_b": _float,
    "nl_sigma": _float,
    "rect": parse_list,
    "h": _float,
    "cells": int,
    "boundary": str,
    "boundary_params": parse_params,
    "boundary_file": str,
    "newton_tol": _float,
    "max_iter": int,
    "origin": parse_list,
    "radii": parse_list,
    "dirs": int,
    "step": _float,
    "R_list": parse_list,
    "threads": int,
    "grid": int,
    "x_list": parse_list,
    "samples": int,
    "require_positive": _bool,
    "points": int,
    "n": int,
    "alpha": _float,
    "K": _float,
    "beta": _float,
    "Lambda": _float,
    "R": _float,
    "Cn": _float,
    "A": _float,
    "distance": _float,
    "C1": _float,
    "C2": _float,
}


def parse_config(text: str) -> dict:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            out[key] = SCHEMA[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from None
    return out


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None


def _domain(cfg):
    d = cfg.get("domain")
    if d is None:
        return None
    if len(d) % 2:
        raise UsageError("domain needs pairs lo, hi")
    return np.array(d).reshape(-1, 2)


def build_manifold(cfg: dict) -> geo.ChartManifold:
    name = cfg.get("manifold", "euclidean")
    if name == "euclidean":
        n = int(cfg.get("dim", 2))
        return geo.euclidean(n, _domain(cfg))
    if name == "hyperbolic":
        return geo.hyperbolic_halfplane(cfg.get("curvature", 1.0), _domain(cfg))
    if name == "paraboloid":
        return geo.paraboloid(_domain(cfg))
    if name == "rotational":
        return geo.rotationally_symmetric(cfg.get("warp", "sinh"), cfg.get("curvature", 1.0))
    raise UsageError(f"unknown manifold {name!r}; expected euclidean, hyperbolic, paraboloid or rotational")


def build_drift(cfg: dict, m: geo.ChartManifold) -> geo.VectorFieldSpec:
    name = cfg.get("drift", "zero")
    if name == "zero":
        return geo.zero_field(m.dim)
    if name == "constant":
        d = cfg.get("drift_direction", [1.0] + [0.0] * (m.dim - 1))
        if len(d) != m.dim:
            raise UsageError("drift_direction length must equal the dimension")
        return geo.constant_field(d)
    if name == "linear":
        return geo.linear_drift(m.dim)
    if name == "rotation":
        return geo.rotation_field(cfg.get("omega", 1.0))
    if name == "grad_phi":
        from .worked_examples import paraboloid_drift
        return paraboloid_drift(cfg.get("variant", "literal"))
    if name == "axis":
        from .worked_examples import CounterexampleFamily
        fam = CounterexampleFamily(cfg.get("delta", 0.5))
        return geo.axis_drift(fam.b_jet, m.dim, name="axis", params={"delta": fam.delta})
    raise UsageError(f"unknown drift {name!r}; expected zero, constant, linear, rotation, grad_phi or axis")


def build_nonlinearity(cfg: dict):
    name = cfg.get("nl", "zero")
    if name == "zero":
        return nonlinearity_by_name("zero")
    if name == "linear":
        return nonlinearity_by_name("linear", c=cfg.get("nl_c", 1.0))
    if name == "rational":
        return nonlinearity_by_name("rational", a=cfg.get("nl_a", 1.0), b=cfg.get("nl_b", 1.0),
                                    sigma=cfg.get("nl_sigma", 1.0))
    return nonlinearity_by_name(name)
