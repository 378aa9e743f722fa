import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftgeom import geometry as geo
from driftgeom import jets as jm
from driftgeom.errors import DomainError, GeometryError, UsageError


def _random_points(m, rng, count):
    lo, hi = m.domain[:, 0], m.domain[:, 1]
    lo = np.maximum(lo, -3.0)
    hi = np.minimum(hi, 3.0)
    if m.kind == "hyperbolic_halfplane":
        lo, hi = np.array([-2.0, 0.3]), np.array([2.0, 3.0])
    return lo[:, None] + (hi - lo)[:, None] * rng.uniform(size=(m.dim, count))


BUILTINS = {
    "euclidean": geo.euclidean(2),
    "hyperbolic": geo.hyperbolic_halfplane(1.0),
    "paraboloid": geo.paraboloid(),
    "rot_sinh": geo.rotationally_symmetric("sinh", 1.0),
    "rot_sin": geo.rotationally_symmetric("sin", 1.0, radius=1.2),
}


def test_euclidean_metric_is_exact_identity():
    m = geo.euclidean(3)
    G = geo.metric_at(m, [[0.3, -1.0], [2.0, 5.0], [-7.0, 0.0]])
    assert np.array_equal(G, np.broadcast_to(np.eye(3)[:, :, None], (3, 3, 2)))


@pytest.mark.parametrize("name", sorted(BUILTINS))
def test_metric_symmetric_positive(name, rng):
    m = BUILTINS[name]
    P = _random_points(m, rng, 200)
    if name == "rot_sin":
        P = 0.5 * P / np.maximum(1.0, np.abs(P).max())
    G = geo.metric_at(m, P)
    assert np.max(np.abs(G - np.swapaxes(G, 0, 1))) <= 1e-14
    assert np.min(geo.sym_eigvalsh(G)[0]) > 0


def test_paraboloid_christoffel_spot_value():
    G = geo.christoffel(geo.paraboloid(), [1.0, 0.0])
    assert G[0, 0, 0] == pytest.approx(0.8, abs=1e-14)


def test_euclidean_christoffel_zero():
    assert np.all(geo.christoffel(geo.euclidean(2), [0.4, -2.0]) == 0.0)


def test_hyperbolic_christoffel_matches_fd_oracle():
    m = geo.hyperbolic_halfplane(1.0)
    G = geo.christoffel(m, [0.0, 1.0])
    assert G[0, 0, 1] == pytest.approx(-1.0, abs=1e-14)
    assert G[1, 0, 0] == pytest.approx(1.0, abs=1e-14)
    assert G[1, 1, 1] == pytest.approx(-1.0, abs=1e-14)
    assert np.allclose(G, geo.christoffel_fd(m, [0.0, 1.0]), atol=1e-8)


def test_paraboloid_ricci():
    m = geo.paraboloid()
    assert np.allclose(geo.ricci(m, [0.0, 0.0]), 4 * np.eye(2), atol=1e-13)
    p = [0.5, 0.0]
    assert float(geo.gauss_curvature(m, p)) == pytest.approx(1.0, rel=1e-13)
    assert np.allclose(geo.ricci(m, p), geo.metric_at(m, p), atol=1e-13)


def test_hyperbolic_constant_curvature(rng):
    m = geo.hyperbolic_halfplane(1.0)
    P = _random_points(m, rng, 50)
    assert np.allclose(geo.gauss_curvature(m, P), -1.0, atol=1e-12)


@pytest.mark.parametrize("warp, K", [("sinh", -1.0), ("sin", 1.0), ("linear", 0.0)])
def test_rotational_curvature(warp, K):
    m = geo.rotationally_symmetric(warp, 1.0, radius=1.2)
    P = np.array([[0.3, -0.5, 0.0, 0.7], [0.2, 0.1, 0.6, -0.4]])
    assert np.allclose(geo.gauss_curvature(m, P), K, atol=1e-10)


def test_ric_x_examples():
    eu = geo.euclidean(2)
    assert np.all(geo.ric_x(eu, geo.constant_field([1.0, 0.0]), [0.3, 0.7]) == 0.0)
    m3 = geo.euclidean(3)
    R = geo.ric_x(m3, geo.linear_drift(3), [0.1, 0.2, 0.3])
    assert np.allclose(R, np.diag([1.0, 0.0, 0.0]), atol=1e-15)
    para = geo.paraboloid()
    p = [0.4, -0.9]
    assert np.allclose(geo.ric_x(para, geo.zero_field(2), p), geo.ricci(para, p), atol=1e-15)


def test_tensor_bundle_invariants(rng):
    m = geo.paraboloid()
    x = geo.rotation_field(0.7)
    for p in _random_points(m, rng, 5).T:
        T = geo.tensors_at(m, x, p)
        assert np.allclose(T.christoffel, np.swapaxes(T.christoffel, 1, 2), atol=1e-12)
        assert np.array_equal(T.ric_x, T.ricci + 0.5 * T.lie_deriv_metric)


@pytest.mark.parametrize("name", ["hyperbolic", "paraboloid", "rot_sinh"])
def test_torsion_free_on_many_points(name, rng):
    m = BUILTINS[name]
    P = _random_points(m, rng, 1000)
    G = geo.christoffel(m, P)
    assert np.max(np.abs(G - np.swapaxes(G, 1, 2))) <= 1e-12


@pytest.mark.parametrize("name", ["hyperbolic", "paraboloid", "rot_sinh"])
def test_metric_compatibility(name, rng):
    # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il, metric derivatives by central differences
    m = BUILTINS[name]
    P = _random_points(m, rng, 20)
    G = geo.metric_at(m, P)
    Gam = geo.christoffel(m, P)
    h = 1e-5
    for k in range(2):
        e = np.zeros((2, 1))
        e[k] = h
        dG = (geo.metric_at(m, P + e) - geo.metric_at(m, P - e)) / (2 * h)
        rhs = np.einsum("li...,lj...->ij...", Gam[:, k], G) + np.einsum("lj...,il...->ij...", Gam[:, k], G)
        scale = np.maximum(1.0, np.abs(dG))
        assert np.max(np.abs(dG - rhs) / scale) <= 1e-6


@pytest.mark.parametrize("name", ["hyperbolic", "paraboloid"])
def test_ad_and_fd_agree(name, rng):
    m = BUILTINS[name]
    for p in _random_points(m, rng, 10).T:
        for ad, fd in ((geo.christoffel(m, p), geo.christoffel_fd(m, p)), (geo.ricci(m, p), geo.ricci_fd(m, p))):
            assert np.max(np.abs(ad - fd) / np.maximum(1.0, np.abs(ad))) <= 1e-6


def test_min_eig_scans():
    eu = geo.euclidean(2)
    grid = geo.box_grid([[0, 1], [0, 1]], 5)
    low, at = geo.min_eig_ric_x_on_grid(eu, geo.zero_field(2), grid)
    assert low == 0.0 and at.tolist() == [0.0, 0.0]
    hy = geo.hyperbolic_halfplane(1.0)
    grid = geo.box_grid([[-1, 1], [0.5, 2.0]], 11)
    low, _ = geo.min_eig_ric_x_on_grid(hy, geo.zero_field(2), grid)
    assert low == pytest.approx(-1 / 0.5**2, abs=1e-8)
    low_rel, _ = geo.min_eig_ric_x_on_grid(hy, geo.zero_field(2), grid, relative=True)
    assert low_rel == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(UsageError):
        geo.min_eig_ric_x_on_grid(eu, geo.zero_field(2), np.zeros((2, 0)))


def test_domain_and_geometry_errors():
    hy = geo.hyperbolic_halfplane(1.0)
    with pytest.raises(DomainError):
        geo.metric_at(hy, [0.0, -1.0])
    bad = geo.ChartManifold(2, np.array([[-1.0, 1.0], [-1.0, 1.0]]),
                            lambda x, y: [[x * 0 + 1.0, x * 0], [x * 0, x * 0 - 1.0]], "custom")
    with pytest.raises(GeometryError):
        geo.metric_at(bad, [0.0, 0.0])


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_sym_eigvalsh_matches_numpy(d, off):
    A = np.diag(d) + np.array([[0, off[0], off[1]], [off[0], 0, off[2]], [off[1], off[2], 0]])
    got = geo.sym_eigvalsh(A[:, :, None])[:, 0]
    assert np.allclose(got, np.linalg.eigvalsh(A), atol=1e-9 * max(1.0, np.abs(A).max()))


def test_relative_eigenvalues():
    G = np.array([[2.0, 0.0], [0.0, 8.0]])[:, :, None]
    A = np.array([[2.0, 0.0], [0.0, -8.0]])[:, :, None]
    assert np.allclose(geo.relative_eigvalsh(A, G)[:, 0], [-1.0, 1.0])


def test_gradient_field_norm():
    m = geo.hyperbolic_halfplane(1.0)
    x = geo.gradient_field(lambda a, b: jm.log(b), name="grad log y")
    # g^{yy} d_y log y = y^2 / y = y; |X|_g = y / y = 1
    assert np.allclose(x.components_at(m, [0.0, 2.0]), [0.0, 2.0])
    assert float(geo.norm_x(m, x, [0.3, 2.0])) == pytest.approx(1.0, rel=1e-14)
