import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftgeom import geometry as geo
from driftgeom import jets as jm
from driftgeom import operators as op
from driftgeom import worked_examples as we
from driftgeom.errors import DomainError, PositivityError, UsageError
from driftgeom.fields import closed_form, grid_field, linear_nl, log_sample, rational_nl, zero_nl

EU = geo.euclidean(2)
HY = geo.hyperbolic_halfplane(1.0)
PARA = geo.paraboloid()


def test_euclidean_gradient_hessian():
    u = closed_form(lambda x, y: x * x - y * y)
    assert np.allclose(op.gradient(EU, u, [1.0, 2.0]), [2.0, -4.0], atol=1e-15)
    assert np.allclose(op.hessian(EU, u, [1.0, 2.0]), np.diag([2.0, -2.0]), atol=1e-15)


def test_paraboloid_potential_critical_at_origin():
    u = closed_form(we.phi("literal"))
    assert np.allclose(op.gradient(PARA, u, [0.0, 0.0]), 0.0, atol=1e-16)


def test_hyperbolic_gradient_of_log_y():
    u = closed_form(lambda x, y: jm.log(y))
    g = op.gradient(HY, u, [0.0, 2.0])
    assert np.allclose(g, [0.0, 2.0], atol=1e-14)
    h = 1e-6
    fd = (np.log(2.0 + h) - np.log(2.0 - h)) / (2 * h)
    assert g[1] == pytest.approx(4.0 * fd, rel=1e-8)


def test_exp_is_x_harmonic():
    u = closed_form(lambda x, y: jm.exp(x))
    P = np.random.default_rng(3).uniform(-3, 3, size=(2, 50))
    assert np.max(np.abs(op.drifted_laplacian(EU, geo.constant_field([1.0, 0.0]), u, P))) <= 1e-12


@pytest.mark.parametrize("m, x, p", [
    (EU, geo.rotation_field(2.0), [0.3, -0.2]),
    (HY, geo.constant_field([1.0, 1.0]), [0.0, 1.5]),
    (PARA, we.paraboloid_drift("literal"), [0.4, 0.4]),
])
def test_constant_field_annihilated(m, x, p):
    u = closed_form(lambda a, b: 0 * a + 3.0)
    assert op.drifted_laplacian(m, x, u, p) == 0.0


def test_one_dimensional_counterexample_solution():
    fam = we.CounterexampleFamily(0.5, x_range=(-6.0, 6.0))
    u = fam.solution().as_field()
    x = geo.axis_drift(fam.b_jet, n=1)
    m = geo.euclidean(1)
    pts = np.linspace(-5, 5, 41)[None, :]
    val = op.drifted_laplacian(m, x, u, pts)
    assert np.max(np.abs(val)) <= 1e-8


def test_bochner_examples():
    assert abs(float(op.bochner_residual(EU, geo.zero_field(), closed_form(lambda x, y: x**3 * y), [0.7, -0.4]))) <= 1e-8
    u = closed_form(lambda x, y: jm.exp(x))
    assert abs(float(op.bochner_residual(EU, geo.constant_field([1.0, 0.0]), u, [1.2, 0.3]))) <= 1e-8
    lin = closed_form(lambda x, y: x + 2 * y)
    P = geo.box_grid([[-1, 1], [-1, 1]], 5)
    t = op.bochner_terms(PARA, we.paraboloid_drift("literal"), lin, P)
    assert np.max(np.abs(t["lhs"] - t["rhs"]) / (1 + np.abs(t["rhs"]))) <= 1e-6


def test_bochner_rejects_grid_fields():
    g = grid_field(np.ones((3, 3)), [np.arange(3.0), np.arange(3.0)])
    with pytest.raises(UsageError):
        op.bochner_residual(EU, geo.zero_field(), g, [1.0, 1.0])


POLY = st.tuples(*[st.floats(-2, 2) for _ in range(6)])


def _poly(c):
    return lambda x, y: c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x**3 + c[5] * y * y * x


@given(POLY, POLY, st.floats(-3, 3), st.floats(-3, 3))
def test_drifted_laplacian_linear(cu, cv, a, b):
    p = [0.4, 1.3]
    x = geo.constant_field([0.5, -1.0])
    u, v = _poly(cu), _poly(cv)
    w = closed_form(lambda s, t: a * u(s, t) + b * v(s, t))
    lhs = op.drifted_laplacian(HY, x, w, p)
    rhs = a * op.drifted_laplacian(HY, x, closed_form(u), p) + b * op.drifted_laplacian(HY, x, closed_form(v), p)
    scale = 1.0 + abs(a) * abs(op.drifted_laplacian(HY, x, closed_form(u), p)) + abs(b) * abs(
        op.drifted_laplacian(HY, x, closed_form(v), p))
    assert abs(lhs - rhs) <= 1e-10 * scale


@given(st.floats(0.5, 3.0), st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_log_substitution_identity(c, px, py):
    # Delta_X w + |grad w|^2 + F(u)/u = (Delta_X u + F(u))/u with w = log u
    nl = rational_nl(1.0, 1.0, 1.0)
    m = PARA
    x = we.paraboloid_drift("literal")
    fn = lambda s, t: c + jm.exp(0.3 * s) * (1 + 0.2 * t * t)
    u = closed_form(fn, positive=True)
    w = closed_form(lambda s, t: jm.log(fn(s, t)))
    p = [px, py]
    uv = float(u(np.array(p)))
    g = op.gradient(m, w, p)
    G = geo.metric_at(m, p)
    lhs = op.drifted_laplacian(m, x, w, p) + g @ G @ g + nl.f(uv) / uv
    rhs = (op.drifted_laplacian(m, x, u, p) + nl.f(uv)) / uv
    assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(rhs))


def test_positivity_violation_raises():
    u = closed_form(lambda x, y: x, positive=True)
    with pytest.raises(PositivityError):
        u(np.array([-1.0, 0.0]))


def test_structural_examples():
    assert op.check_structural_f(zero_nl()).passed
    assert op.check_structural_f(linear_nl(1.0)).passed
    rep = op.check_structural_f(rational_nl(1.0, 1.0, 1.0))
    assert rep.passed
    # independent dense maximization of t F' - F for F = t/(t+1): -t^2/(t+1)^2 < 0
    t = np.logspace(-6, 6, 20001)
    assert np.max(-(t**2) / (t + 1) ** 2) <= 0.0
    with pytest.raises(UsageError):
        op.check_structural_f(zero_nl(), sample=[1.0, 0.0])
    with pytest.raises(UsageError):
        op.check_structural_f(zero_nl(), sample=[])


def test_fit_structural_constants():
    assert op.fit_structural_constants(linear_nl(1.0)) == (0.0, 1.0)
    assert op.fit_structural_constants(zero_nl()) == (0.0, 0.0)
    a, b = op.fit_structural_constants(rational_nl(1.0, 1.0, 1.0))
    assert a <= 0.0
    assert b == pytest.approx(1.0 / (1.0 + 1e-6), rel=1e-15)


@pytest.mark.parametrize("nl", [zero_nl(), linear_nl(2.0), rational_nl(2.0, 0.5, 1.5)])
def test_nonlinearity_derivative_consistent(nl):
    assert nl.derivative_mismatch(log_sample()) <= 1e-6


def test_grid_derivatives_against_closed_form():
    h = 1e-3
    ax = [np.arange(0, 1 + h / 2, h), np.arange(1, 2 + h / 2, h)]
    X, Y = np.meshgrid(*ax, indexing="ij")
    fn = lambda x, y: jm.sin(x) * y * y
    g = grid_field(np.sin(X) * Y * Y, ax)
    c = closed_form(fn)
    p = np.array([0.5, 1.5])
    assert np.allclose(op.gradient(HY, g, p), op.gradient(HY, c, p), rtol=1e-5)
    assert np.allclose(op.hessian(HY, g, p), op.hessian(HY, c, p), rtol=1e-5, atol=1e-5)
    with pytest.raises(DomainError):
        op.gradient(HY, g, np.array([0.0, 1.5]))
