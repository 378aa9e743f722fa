import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftgeom import geometry as geo
from driftgeom import operators as op
from driftgeom.fields import closed_form
from driftgeom.solver import kernels
from driftgeom.solver.krylov import bicgstab
from driftgeom.solver.stencil import OFFSETS, stencil_weights


def test_offsets_cover_nine_point_block():
    assert OFFSETS[0] == (0, 0)
    assert sorted(OFFSETS) == sorted((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))


def test_euclidean_weights_are_five_point_laplacian():
    P = np.stack(np.meshgrid(np.linspace(0, 1, 4), np.linspace(0, 1, 4), indexing="ij"))
    W = stencil_weights(geo.euclidean(2), geo.zero_field(), P, 0.5, 0.25)
    assert np.all(W[0] == -2 / 0.25 - 2 / 0.0625)
    assert np.all(W[1] == 4.0) and np.all(W[3] == 16.0) and np.all(W[5:] == 0.0)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_weights_exact_on_quadratics(a, b, c):
    m = geo.paraboloid()
    X = geo.rotation_field(0.7)
    h = 0.1
    p = np.array([[0.3], [-0.2]])
    W = stencil_weights(m, X, p, h, h)[:, 0]
    u = lambda x, y: a * x * x + b * x * y + c * y * y + x - 2 * y
    approx = sum(W[k] * u(p[0, 0] + di * h, p[1, 0] + dj * h) for k, (di, dj) in enumerate(OFFSETS))
    exact = float(op.drifted_laplacian(m, X, closed_form(u), p[:, 0]))
    assert approx == pytest.approx(exact, rel=1e-9, abs=1e-9)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_apply("fortran")


def test_backend_env_selection():
    assert kernels.BACKEND in kernels.available_backends()


@settings(max_examples=20)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1))
def test_bicgstab_solves_diagonally_dominant(n, seed):
    r = np.random.default_rng(seed)
    A = r.normal(size=(n, n)) + 3 * n * np.eye(n)
    rhs = r.normal(size=n)
    x, it, res = bicgstab(lambda v: A @ v, rhs, 1.0 / np.diag(A), 1e-12)
    assert res <= 1e-12
    assert np.allclose(A @ x, rhs, atol=1e-11)


def test_bicgstab_zero_rhs():
    x, it, res = bicgstab(lambda v: v, np.zeros(5), np.ones(5), 1e-12)
    assert it == 0 and not x.any()
