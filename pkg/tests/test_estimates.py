import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftgeom import estimates as es
from driftgeom import geometry as geo
from driftgeom import jets as jm
from driftgeom import worked_examples as we
from driftgeom.errors import DomainError, PositivityError, UsageError
from driftgeom.fields import closed_form, zero_nl
from driftgeom.solver.boundary import boundary_preset

EU = geo.euclidean(2)
DX = geo.constant_field([1.0, 0.0])


def test_bracket_examples():
    assert es.gradient_bound_bracket(es.EstimateParams(2, R=2.0)) == 4.0
    p = es.EstimateParams(3, K=0.0, Lambda=3.0, alpha=1.0, beta=2.0, R=1.0)
    assert es.gradient_bound_bracket(p, raw=True) == 13.0
    assert es.gradient_bound_bracket(es.EstimateParams(2)) == 0.0


def test_params_validation():
    for bad in ({"n": 1}, {"n": 2, "K": -1.0}, {"n": 2, "beta": -0.1}, {"n": 2, "R": 0.0}, {"n": 2, "Cn": 0.0}):
        with pytest.raises(UsageError):
            es.EstimateParams(**bad)
    assert es.EstimateParams(4).Cn == 32.0


PARAM = st.tuples(st.floats(-5, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0.1, 10))


@given(PARAM, st.integers(0, 4), st.floats(0.0, 3.0))
def test_bracket_monotone(base, which, bump):
    alpha, beta, lam, K, R = base
    p = es.EstimateParams(3, K=K, Lambda=lam, alpha=alpha, beta=beta, R=R)
    vals = [alpha, beta, lam, K]
    if which < 4:
        vals[which] += bump
        q = es.EstimateParams(3, K=vals[3], Lambda=vals[2], alpha=vals[0], beta=vals[1], R=R)
        assert es.gradient_bound_bracket(q) >= es.gradient_bound_bracket(p)
    else:
        q = es.EstimateParams(3, K=K, Lambda=lam, alpha=alpha, beta=beta, R=R + bump)
        assert es.gradient_bound_bracket(q) <= es.gradient_bound_bracket(p)


def test_cubic_examples():
    c = es.cubic_from_params(es.EstimateParams(2, Lambda=1.0, beta=1.0), A=0.0)
    assert (c.p, c.q) == (-12.0, -4.0)
    assert es.depressed_cubic_discriminant(c) == 6480.0 >= 1104.0
    assert es.depressed_cubic_discriminant(es.CubicCoeffs(-7.0, -6.0)) == 400.0
    assert es.depressed_cubic_discriminant(es.CubicCoeffs(-5.0, 0.0)) == 500.0
    assert es.depressed_cubic_roots(es.CubicCoeffs(-4.0, 0.0)) == (-2.0, 0.0, 2.0)
    r = es.depressed_cubic_roots(es.CubicCoeffs(-7.0, -6.0))
    assert np.allclose(r, [-2.0, -1.0, 3.0], atol=1e-13)
    assert r[-1] <= 2 / math.sqrt(3) * math.sqrt(7)
    r = es.depressed_cubic_roots(es.CubicCoeffs(-3.0, -2.0))
    assert np.allclose(r, [-1.0, -1.0, 2.0], atol=1e-7)


def test_cubic_complex_roots_rejected():
    with pytest.raises(DomainError):
        es.depressed_cubic_roots(es.CubicCoeffs(1.0, -1.0))
    with pytest.raises(DomainError):
        es.depressed_cubic_roots(es.CubicCoeffs(2.0, 0.0))


@given(st.floats(0.01, 10), st.floats(0.01, 10), st.floats(-5, 5), st.floats(0, 3), st.integers(2, 5))
def test_cubic_root_structure(beta, lam, alpha, K, n):
    c = es.cubic_from_params(es.EstimateParams(n, K=K, Lambda=lam, alpha=alpha, beta=beta))
    scale = abs(c.p) ** 3 + c.q**2
    assert es.depressed_cubic_discriminant(c) >= 1104 * beta**2 * lam**2 - 1e-9 * scale
    r = es.depressed_cubic_roots(c)
    assert sum(v > 0 for v in r) == 1
    assert r[-1] <= 2 / math.sqrt(3) * math.sqrt(-c.p) + 1e-12
    for t in r:
        assert abs(t**3 + c.p * t + c.q) <= 1e-9 * max(1.0, abs(c.p) ** 1.5)


def test_harnack_examples():
    assert es.harnack_factor(es.EstimateParams(2), 5.0) == 1.0
    assert es.harnack_factor(es.EstimateParams(2, beta=1.0), 2.0, C1=1.0) == pytest.approx(math.exp(2), abs=1e-12)
    with pytest.raises(UsageError):
        es.harnack_factor(es.EstimateParams(2), -1.0)


def test_harnack_exp_solution():
    rep = es.harnack_experiment(EU, DX, [[0, 1], [0, 1]], boundary_preset("exp_x"), math.sqrt(2), C1=1.0)
    assert rep["gamma"] == 0.0 and rep["Lambda"] == pytest.approx(1.0)
    assert rep["sup_over_inf"] == pytest.approx(math.e, rel=1e-12)
    assert rep["sup_over_inf"] <= rep["factor"] == pytest.approx(math.exp(math.sqrt(2)))


def test_omega_examples():
    assert es.omega_growth(lambda P: np.full(P.shape[1], 3.0), [1, 2, 3, 4])["omega"] == pytest.approx(0.0, abs=1e-14)
    om = es.omega_growth(lambda P: np.exp(P[0]), [4, 8, 16, 32])
    assert abs(om["omega"] - 1.0) <= 5e-2
    assert np.allclose(om["sup_log"], [r + math.log1p(math.exp(-r)) for r in (4, 8, 16, 32)], rtol=1e-12)
    with pytest.raises(UsageError):
        es.omega_growth(lambda P: P[0], [1, 2])
    with pytest.raises(PositivityError):
        es.omega_growth(lambda P: P[0], [1, 2, 3])


def test_empirical_constant():
    assert es.empirical_constant([(0.0, 7.0)])["Cn_min"] == 0.0
    for R in (2.0, 4.0, 8.0):
        assert es.empirical_constant([(1.0, 1.0 + 1 / R**2)])["Cn_min"] < 1.0
    with pytest.raises(UsageError):
        es.empirical_constant([])
    with pytest.raises(UsageError):
        es.empirical_constant([(1.0, 0.0)])


def test_log_gradient_field():
    w, Q = es.log_gradient_field(EU, closed_form(lambda x, y: jm.exp(2 * x + y), positive=True))
    assert float(Q(np.array([0.3, 0.1]))) == pytest.approx(5.0, rel=1e-14)


def test_fit_decay_exponent():
    R = np.array([1.0, 2.0, 4.0])
    assert es.fit_decay_exponent(R, 3 / R**2) == pytest.approx(-2.0, abs=1e-12)
    assert es.fit_decay_exponent(R, [1.0, 0.0, 0.0]) == -math.inf


def test_metric_shell_euclidean_and_paraboloid():
    o = np.zeros(2)
    pts = es.metric_shell(o, 1.5, lambda P: np.hypot(P[0], P[1]), angles=32)
    assert np.allclose(np.hypot(*pts), 1.5, atol=1e-12)
    pts = es.metric_shell(o, 1.4789428575445974, we.paraboloid_pole_distance)
    assert np.allclose(np.hypot(*pts), 1.0, atol=1e-12)
    with pytest.raises(DomainError):
        es.metric_shell(o, 1.0, lambda P: np.zeros(P.shape[1]))


def test_ball_mask_variants():
    mask, info = es.ball_mask(EU, [0.0, 0.0], 1.0)
    assert info["ball"] == "exact" and mask(np.array(0.5), np.array(0.5)) and not mask(np.array(1.0), np.array(0.5))
    _, info = es.ball_mask(geo.paraboloid(), [0.0, 0.0], 1.0, distance=we.paraboloid_pole_distance)
    assert info["ball"] == "exact (supplied distance)"


def test_gradient_experiment_exp():
    rep = es.gradient_estimate_experiment(EU, DX, zero_nl(),
                                          [0.5, 0.5], 0.25, boundary_preset("exp_x"), cells=64)
    assert abs(rep["measured"] - 1.0) <= 4e-3
    assert rep["passed"] and rep["ratio"] < 1.0


def test_liouville_constant_boundary_gives_zero():
    rep = es.liouville_decay_experiment(EU, geo.zero_field(), [1.0, 2.0], cells=16,
                                        boundary_factory=lambda R: boundary_preset("constant", value=2.0))
    assert rep["Q_sup"] == [0.0, 0.0]


def test_liouville_euclidean_control_exponent():
    rep = es.liouville_decay_experiment(EU, geo.zero_field(), [1.0, 2.0, 4.0], cells=64)
    assert rep["strictly_decreasing"] and rep["decay_exponent"] <= -1.5
