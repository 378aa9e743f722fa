import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from driftgeom import geometry as geo
from driftgeom import jets as jm
from driftgeom import operators as op
from driftgeom import worked_examples as we
from driftgeom.errors import DomainError, NonConvergenceError, PositivityError, UsageError
from driftgeom.fields import closed_form, linear_nl, zero_nl
from driftgeom.solver import log_gradient_sup, solve_elliptic_2d, solve_ode_1d
from driftgeom.solver.boundary import boundary_preset
from driftgeom.solver.kernels import apply_stencil, available_backends
from driftgeom.solver.ode1d import ode_residual

EU = geo.euclidean(2)
UNIT = [[0.0, 1.0], [0.0, 1.0]]
DX = geo.constant_field([1.0, 0.0])


def _exp_error(h):
    sol = solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("exp_x"), h=h)
    return float(np.max(np.abs(sol.values - np.exp(sol.mesh[0]))))


def test_exp_solution_second_order():
    h = 1 / 64
    assert _exp_error(h) <= h * h
    errs = [_exp_error(h) for h in (1 / 16, 1 / 32, 1 / 64, 1 / 128)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(1.8 <= o <= 2.2 for o in orders)


def test_linear_exactness():
    sol = solve_elliptic_2d(EU, geo.zero_field(), zero_nl(), UNIT, boundary_preset("linear", c=2.0, a=1.0, b=-1.0),
                            h=1 / 32)
    X, Y = sol.mesh
    assert np.max(np.abs(sol.values - (2 + X - Y))) <= 1e-10


def test_weak_nonlinearity_self_oracle():
    nl = linear_nl(0.01)
    coarse = solve_elliptic_2d(EU, geo.zero_field(), nl, UNIT, boundary_preset("constant", value=1.0), h=1 / 32)
    fine = solve_elliptic_2d(EU, geo.zero_field(), nl, UNIT, boundary_preset("constant", value=1.0), h=1 / 128)
    assert np.max(np.abs(coarse.values - fine.values[::4, ::4])) <= 4e-4


def test_helmholtz_type_manufactured_solution():
    # u = cos(x/sqrt2) cos(y/sqrt2) solves Delta u + u = 0
    exact = lambda x, y: np.cos(x / math.sqrt(2)) * np.cos(y / math.sqrt(2))
    errs = []
    for h in (1 / 16, 1 / 32):
        sol = solve_elliptic_2d(EU, geo.zero_field(), linear_nl(1.0), UNIT, exact, h=h)
        errs.append(float(np.max(np.abs(sol.values - exact(*sol.mesh)))))
    assert 1.8 <= math.log2(errs[0] / errs[1]) <= 2.2


@pytest.mark.parametrize("m, x, rect, bc", [
    (EU, DX, UNIT, boundary_preset("exp_x")),
    (EU, geo.rotation_field(3.0), [[-1, 1], [-1, 1]], boundary_preset("exp_cos")),
    (geo.hyperbolic_halfplane(1.0), geo.zero_field(), [[-1, 1], [0.5, 1.5]], boundary_preset("linear", c=3.0, a=1.0, b=0.5)),
    (geo.paraboloid(), we.paraboloid_drift("literal"), [[-1, 1], [-1, 1]], boundary_preset("exp_x", scale=0.5)),
])
def test_maximum_principle_and_consistency(m, x, rect, bc):
    sol = solve_elliptic_2d(m, x, zero_nl(), rect, bc, cells=32)
    v = sol.values
    edge = np.concatenate([v[0], v[-1], v[:, 0], v[:, -1]])
    inner = v[1:-1, 1:-1]
    assert inner.min() >= edge.min() - 1e-12 and inner.max() <= edge.max() + 1e-12
    assert abs(sol.recompute_residual_inf() - sol.residual_inf) <= 1e-12
    assert sol.converged and sol.residual_inf <= 1e-8


def test_grid_operator_reproduces_residual():
    sol = solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("exp_x"), h=1 / 16)
    field = sol.as_field()
    pts = sol.mesh[:, 1:-1, 1:-1].reshape(2, -1)
    dl = op.drifted_laplacian(EU, DX, field, pts)
    assert np.max(np.abs(dl.ravel() - sol.residual().ravel())) <= 1e-12 * np.max(np.abs(sol.values)) / sol.h[0] ** 2


def test_positive_boundary_keeps_positive():
    sol = solve_elliptic_2d(EU, geo.rotation_field(1.0), zero_nl(), [[-1, 1], [-1, 1]],
                            boundary_preset("exp_cos", offset=1.5), cells=24, require_positive=True)
    assert sol.values.min() > 0


def test_solver_errors():
    with pytest.raises(DomainError):
        solve_elliptic_2d(geo.hyperbolic_halfplane(1.0), geo.zero_field(), zero_nl(), [[0, 1], [-1, 1]],
                          boundary_preset("constant"), cells=8)
    with pytest.raises(PositivityError):
        solve_elliptic_2d(EU, geo.zero_field(), zero_nl(), UNIT, boundary_preset("linear", c=-1.0), cells=8,
                          require_positive=True)
    with pytest.raises(NonConvergenceError) as info:
        solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("exp_x"), h=1 / 16, max_iter=0)
    assert info.value.last_iterate is not None
    with pytest.raises(UsageError):
        solve_elliptic_2d(geo.euclidean(3), geo.zero_field(3), zero_nl(), UNIT, boundary_preset("constant"), cells=8)


def test_log_gradient_sup_examples():
    const = solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("constant", value=2.0), cells=16)
    assert log_gradient_sup(const)[0] == 0.0
    sol = solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("exp_x"), h=1 / 64)
    val, _ = log_gradient_sup(sol)
    assert abs(math.sqrt(val) - 1.0) <= 2e-3
    with pytest.raises(UsageError):
        log_gradient_sup(sol, subrect=[[5, 6], [5, 6]])


def test_ode_examples():
    sol = solve_ode_1d(lambda t: np.ones_like(np.asarray(t, dtype=float)), 0.0, 1.0, (-1.0, 2.0))
    assert float(sol.value(np.array([1.0]))[0]) == pytest.approx(math.e - 1, abs=1e-12)
    assert float(sol.log_gradient(np.array([1.5]))[0]) == pytest.approx(math.exp(1.5) / math.expm1(1.5), rel=1e-12)
    lin = solve_ode_1d(lambda t: np.zeros_like(np.asarray(t, dtype=float)), 2.0, 3.0, (-1.0, 2.0))
    assert np.allclose(lin.value(np.array([-0.5, 0.0, 1.5])), [0.5, 2.0, 6.5], atol=1e-13)
    with pytest.raises(UsageError):
        solve_ode_1d(lambda t: t, 0.0, 1.0, (1.0, 1.0))


def _simpson(f, a, b, n):
    x = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    return (b - a) / (3 * n) * np.sum(w * f(x))


def test_counterexample_solution_against_fixed_grid_simpson():
    fam = we.CounterexampleFamily(0.5, x_range=(-3.0, 3.0))
    u2 = float(fam.solution().value(np.array([2.0]))[0])
    bprime = lambda t: (1 + t * t) ** -0.25
    # integration by parts: B(x) = x b(x) - (2/3)((1+x^2)^(3/4) - 1); b itself by fixed-grid Simpson
    b = lambda q: np.array([_simpson(bprime, 0, qi, 2000) for qi in np.atleast_1d(q)])
    Bc = lambda s: s * b(s) - (2 / 3) * ((1 + s * s) ** 0.75 - 1)
    ref = _simpson(lambda s: np.exp(Bc(s)), 0, 2.0, 2000)
    assert abs(u2 - ref) <= 1e-8


def test_ode_residual_on_scan():
    fam = we.CounterexampleFamily(0.5, x_range=(-7.0, 7.0))
    res = ode_residual(fam.solution(), np.linspace(-5, 5, 1000))
    assert np.max(res) <= 1e-8


@settings(max_examples=25)
@given(st.integers(3, 20), st.integers(3, 20), st.integers(0, 2**32 - 1))
def test_backends_bit_identical(nx, ny, seed):
    if "cython" not in available_backends():
        pytest.skip("compiled kernel not built")
    r = np.random.default_rng(seed)
    W = r.normal(size=(9, nx, ny))
    u = r.normal(size=(nx, ny))
    a = apply_stencil(W, u, backend="python")
    b = apply_stencil(W, u, backend="cython")
    c = apply_stencil(W, u, backend="cython", threads=4)
    assert np.array_equal(a, b) and np.array_equal(b, c)


def test_solution_independent_of_threads_and_backend():
    base = solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("exp_x"), h=1 / 32, backend="python")
    for backend in available_backends():
        for threads in (1, 3):
            other = solve_elliptic_2d(EU, DX, zero_nl(), UNIT, boundary_preset("exp_x"), h=1 / 32,
                                      backend=backend, threads=threads)
            assert np.array_equal(base.values, other.values)
