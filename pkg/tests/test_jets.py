import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftgeom import jets as jm

finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def test_polynomial_partials_are_exact():
    x, y = jm.variables([1.5, -2.0], 4)
    f = x**3 * y + 2 * x * y**2
    assert f.value == pytest.approx(1.5**3 * -2.0 + 2 * 1.5 * 4.0)
    assert f.partial((1, 0)) == pytest.approx(3 * 1.5**2 * -2.0 + 2 * 4.0)
    assert f.partial((0, 2)) == pytest.approx(4 * 1.5)
    assert f.partial((2, 1)) == pytest.approx(6 * 1.5)
    assert f.partial((3, 1)) == pytest.approx(6.0)
    assert f.partial((4, 0)) == 0.0


def test_derivative_lowers_order():
    x, y = jm.variables([0.3, 0.4], 3)
    f = jm.exp(x * y)
    g = jm.d(f, 0)
    assert jm.order_of(g) == 2
    assert g.value == pytest.approx(0.4 * math.exp(0.12))


def test_batch_shapes_broadcast():
    P = np.stack(np.meshgrid(np.linspace(0, 1, 3), np.linspace(0, 1, 4), indexing="ij"))
    x, y = jm.variables(P, 2)
    f = jm.sin(x) * jm.cos(y)
    assert f.batch_shape == (3, 4)
    assert np.allclose(f.partial((1, 1)), -np.cos(P[0]) * np.sin(P[1]))


@given(finite, finite)
def test_product_rule(a, b):
    x, y = jm.variables([a, b], 2)
    u, v = jm.sin(x + 2 * y), jm.exp(x - y)
    lhs = jm.d(u * v, 0)
    rhs = jm.d(u, 0) * v + u * jm.d(v, 0)
    assert np.allclose(lhs.c, rhs.truncate(lhs.order).c, rtol=1e-12, atol=1e-12)


@given(st.floats(min_value=0.1, max_value=5.0))
def test_exp_log_inverse(t):
    s = jm.univariate(t, 4)
    back = jm.exp(jm.log(s))
    assert back.value == pytest.approx(t, rel=1e-14)
    assert back.partial((1,)) == pytest.approx(1.0, abs=1e-12)
    assert back.partial((3,)) == pytest.approx(0.0, abs=1e-10)


@given(st.floats(min_value=0.2, max_value=3.0), st.floats(min_value=-2.5, max_value=2.5))
def test_power_matches_closed_form(t, alpha):
    s = jm.univariate(t, 3)
    p = jm.power(s, alpha)
    assert p.partial((2,)) == pytest.approx(alpha * (alpha - 1) * t ** (alpha - 2), rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("fn, d1", [
    (jm.arctan, lambda t: 1 / (1 + t * t)),
    (jm.arcsinh, lambda t: 1 / math.sqrt(1 + t * t)),
    (jm.sinh, math.cosh),
    (jm.cosh, math.sinh),
    (jm.sqrt, lambda t: 0.5 / math.sqrt(t)),
])
def test_elementary_first_derivatives(fn, d1):
    t = 0.7
    assert fn(jm.univariate(t, 2)).partial((1,)) == pytest.approx(d1(t), rel=1e-14)


def test_arccosh_derivative():
    t = 1.8
    assert jm.arccosh(jm.univariate(t, 2)).partial((1,)) == pytest.approx(1 / math.sqrt(t * t - 1), rel=1e-14)


def test_floats_pass_through():
    assert jm.exp(0.0) == 1.0
    assert jm.value(3.0) == 3.0
    assert jm.order_of(2.0) == math.inf


def test_antiderivative_chain():
    # F(t) = int_0^t cos; the jet carries derivatives from the integrand
    s = jm.univariate(0.5, 3)
    F = jm.antiderivative(s, np.sin, jm.cos)
    assert F.value == pytest.approx(math.sin(0.5))
    assert F.partial((1,)) == pytest.approx(math.cos(0.5))
    assert F.partial((3,)) == pytest.approx(-math.cos(0.5))
