import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftgeom import geometry as geo
from driftgeom import worked_examples as we

# Frozen oracle values: mpmath at 30 digits with b(x) = x 2F1(1/4, 1/2; 3/2; -x^2) and
# B(x) = x b(x) - (2/3)((1 + x^2)^(3/4) - 1); sympy symbolic tensors for the paraboloid.
B_ORACLE = {1.0: 0.937489750746936211252415877642, 3.0: 2.29712928518206635682493901806,
            5.0: 3.28874609938007074833036615759}
LOGGRAD_ORACLE = {5.0: 3.13191889937218090872335339622, 10.0: 5.06795173598510369817920810158,
                  20.0: 7.71883635455355091618749522668}
LOGU_ORACLE = {5.0: 8.29268436597306861968703902274, 10.0: 29.1206767805522866951031775883,
               20.0: 93.8426315271294670666712726446}
P0 = [0.5, -1.0 / 3.0]
RICX_ORACLE = {
    "literal": [[0.9838236543738128, -0.030364859597573242], [-0.030364859597573242, 0.9585196047091684]],
    "alternate": [[1.171487603305785, -0.2231404958677686], [-0.2231404958677686, 0.9855371900826446]],
}
NORMSQ_ORACLE = {"literal": 0.06380531572571038, "alternate": 0.024722952667167543}
POLE_ORACLE = {0.5: 0.573896787348159518508574512297, 1.0: 1.47894285754459743382790601943,
               2.0: 4.64678376243293587338261556749}


def test_paraboloid_symbolic_tensors():
    m = geo.paraboloid()
    G = geo.christoffel(m, P0)
    assert np.allclose(G[0], 9 / 11 * np.eye(2), atol=1e-15)
    assert np.allclose(G[1], -6 / 11 * np.eye(2), atol=1e-15)
    assert np.allclose(geo.ricci(m, P0), np.array([[162, -54], [-54, 117]]) / 121, atol=1e-14)
    for v in we.PHI_VARIANTS:
        X = we.paraboloid_drift(v)
        assert np.allclose(geo.ric_x(m, X, P0), RICX_ORACLE[v], atol=1e-14)
        assert float(geo.norm_x(m, X, P0)) ** 2 == pytest.approx(NORMSQ_ORACLE[v], rel=1e-13)
        assert float(geo.norm_x(m, X, [1.0, 0.0])) ** 2 == pytest.approx(1 / 125, rel=1e-13)


def test_pole_distance():
    for rho, d in POLE_ORACLE.items():
        assert float(we.paraboloid_radial_distance(rho)) == pytest.approx(d, rel=1e-14)
        assert float(we.paraboloid_pole_distance([rho, 0.0])) == pytest.approx(d, rel=1e-14)


def test_printed_vs_ad_report():
    rep = we.paraboloid_printed_vs_ad()
    assert rep["consistent_ok"]
    for e in rep["entries"]:
        if e["expected_consistent"]:
            assert e["deviation"] <= 1e-10
    assert all(c["deviation"] <= 1e-10 for c in rep["christoffel"])
    spots = rep["spot_values"]
    assert spots["K(0,0)"] == 4.0
    assert spots["G1_11(1,0)"] == 0.8 and spots["G1_22(1,0)"] == 0.8
    assert spots["|X|^2(1,0) printed"] == pytest.approx(1 / 500, rel=1e-15)
    assert spots["|X|^2(1,0) literal"] == pytest.approx(1 / 125, rel=1e-13)
    assert rep["discrepancies"] == ["grad_eucl_phi", "hess_eucl_phi", "hess_phi", "ric_x", "norm_x_sq"]


def test_discrepancy_report_stable():
    a = we.paraboloid_printed_vs_ad(geo.box_grid([[-1, 1], [-1, 1]], 9))
    b = we.paraboloid_printed_vs_ad(geo.box_grid([[-1, 1], [-1, 1]], 9))
    assert a == b and a["discrepancies"]


def test_hypothesis_check():
    rep = we.paraboloid_hypothesis_check()
    for v in we.PHI_VARIANTS:
        assert rep["variants"][v]["norm_x_at_origin"] == 0.0
    assert rep["printed_decreasing"]
    assert rep["satisfying_variants"]
    assert any(rep["variants"][v]["min_eig_ric_x"] >= -1e-9 for v in we.PHI_VARIANTS)


def test_counterexample_b_values():
    fam = we.CounterexampleFamily(0.5)
    xs = np.array(sorted(B_ORACLE))
    assert np.allclose(fam.b(xs), [B_ORACLE[x] for x in xs], rtol=1e-12)
    assert float(fam.b(np.array([0.0]))[0]) == 0.0
    assert B_ORACLE[1.0] <= 2 * math.sqrt(2)


@given(st.floats(0.05, 0.95), st.floats(-20, 20))
def test_b_odd_bounded_increasing(delta, x):
    fam = we.CounterexampleFamily(delta)
    b = fam.b(np.array([x, -x, x + 0.5]))
    assert abs(b[0] + b[1]) <= 1e-10
    assert abs(b[0]) <= (1 + abs(x)) ** delta / delta
    assert b[2] > b[0]
    assert fam.b_prime(x) > 0


def test_counterexample_bound_check():
    rep = we.counterexample_bound_check(0.5, np.linspace(-20, 20, 200))
    assert rep["bound_ok"] and rep["odd_ok"] and rep["increasing_ok"] and rep["lower_envelope_ok"]


def test_loggrad_against_oracle():
    rep = we.counterexample_loggrad_growth(0.5, [5.0, 10.0, 20.0])
    assert np.allclose(rep["loggrad"], [LOGGRAD_ORACLE[x] for x in (5.0, 10.0, 20.0)], rtol=1e-10)
    assert np.allclose(rep["log_u"], [LOGU_ORACLE[x] for x in (5.0, 10.0, 20.0)], rtol=1e-12)
    assert rep["ode_residual_ok"] and rep["increasing"] and rep["gap_shrinks"] and rep["b_prime_nonnegative"]


def test_loggrad_stays_below_b():
    # phi = u'/u obeys phi' = phi (b - phi); from phi(0+) = +inf it crosses b and stays below it
    rep = we.counterexample_loggrad_growth(0.5, [5.0, 10.0, 20.0])
    assert all(r < b for r, b in zip(rep["loggrad"], rep["b"]))


def test_log_space_beyond_overflow():
    fam = we.CounterexampleFamily(0.5, x_range=(-1.0, 81.0))
    lu = float(fam.solution().log_value(np.array([80.0]))[0])
    assert lu > 700 and math.isfinite(lu)


def test_shifted_solution_at_origin():
    fam = we.CounterexampleFamily(0.5, x_range=(-2.0, 2.0))
    sol = fam.solution(c1=1.0, c2=1.0)
    assert float(sol.log_gradient(np.array([0.0]))[0]) == pytest.approx(1.0, abs=1e-15)


def test_bounded_control():
    rep = we.bounded_control_check(1.0, 10.0)
    assert rep["ok"] and rep["quadrature_error"] <= 1e-12


def test_sharpness_example():
    rep = we.sharpness_example_check()
    assert rep["max_abs_drifted_laplacian"] <= 1e-10
    assert rep["ric_x_max_abs"] == 0.0
    assert abs(rep["omega"] - 1.0) <= 5e-2
    assert rep["sup_loggrad_closed_form"] == pytest.approx(1.0, abs=1e-14)
    assert abs(rep["sup_loggrad_grid"] - 1.0) <= 2e-3
    assert rep["theorem_consistent_min_Cn"] <= 1 / (0.95 + 0.95**2)
