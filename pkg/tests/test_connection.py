import numpy as np
import pytest

from lckverify import connection as conn
from lckverify import tensors as tn
from lckverify.anchors import P0
from lckverify.forms import Form
from lckverify.jets import constant_jet, coords_jet
from lckverify.lck import Geometry


def test_christoffel_hopf_p0(hopf2):
    G = Geometry(hopf2, P0).gamma.val[0]
    assert G[0, 0, 0] == pytest.approx(-1.0)
    assert G[0, 1, 1] == pytest.approx(1.0)
    assert G[1, 0, 1] == pytest.approx(-1.0)


def test_christoffel_symmetric_and_metric(deformed_geo):
    G = deformed_geo.gamma
    np.testing.assert_array_equal(G.val, np.swapaxes(G.val, 2, 3))
    res = conn.metricity_residual(deformed_geo.g, G)
    assert np.abs(res.val).max() < 1e-10


def test_flat_christoffel_zero(flat2):
    geo = Geometry(flat2, np.array([[0.5, 0.1, -0.3, 2.0]]))
    assert not geo.gamma.val.any()


def test_flat_divergence_and_laplacian(flat2):
    pts = np.array([[0.5, 0.1, -0.3, 2.0], [1.5, -1.1, 0.3, 0.2]])
    geo = Geometry(flat2, pts)
    x = coords_jet(pts)
    alpha = Form(1, Form(1, constant_jet(np.tile([1.0, 0, 0, 0], (2, 1)), 4)).packed * x[0])
    np.testing.assert_allclose(conn.codifferential(alpha, geo.ginv, geo.gamma).val, -1.0)
    lap = conn.laplacian(x[0] * x[0], geo.ginv, geo.gamma)
    np.testing.assert_allclose(lap.val, -2.0)


def test_hopf_log_r_harmonic(hopf_geo):
    h = hopf_geo.extra("log_r")
    lap = conn.laplacian(h, hopf_geo.ginv, hopf_geo.gamma).val
    assert np.abs(lap).max() < 1e-9


def test_codifferential_matches_divergence_form(deformed_geo):
    geo = deformed_geo
    a = conn.codifferential(geo.theta, geo.ginv, geo.gamma).val
    b = conn.codifferential_divergence(geo.theta, geo.g, geo.ginv).val
    np.testing.assert_allclose(a, b, atol=1e-12)
    la = conn.laplacian(geo.theta_sq, geo.ginv, geo.gamma).val
    lb = conn.laplacian_divergence(geo.theta_sq, geo.g, geo.ginv).val
    np.testing.assert_allclose(la, lb, atol=1e-11)


def test_second_fundamental_relation(deformed_geo):
    geo = deformed_geo
    gF = np.einsum("zkj,zki->zij", geo.g_val, geo.F.val)
    # g(F X, Y) = S(X, Y)
    np.testing.assert_allclose(np.einsum("zkl,zki->zil", geo.g_val, geo.F.val), geo.S.val, atol=1e-13)
    assert np.abs(conn.symmetric_residual(geo.S)).max() < 1e-12
    assert gF.shape == geo.S.val.shape


def test_lie_derivative_of_constant_fields_flat(flat2):
    geo = Geometry(flat2, np.array([[0.5, 0.1, -0.3, 2.0]]))
    X = constant_jet(np.array([[1.0, 0, 0, 0]]), 4)
    assert not conn.lie_derivative_endo(X, geo.J).val.any()


def test_lie_bracket_coordinates():
    pts = np.array([[0.3, 0.7]])
    x = coords_jet(pts)
    X = x * 0.0 + np.array([1.0, 0.0])        # d/dx
    Y = x * x[0]                                # x * position field
    br = conn.lie_derivative_vector(X, Y).val[0]
    np.testing.assert_allclose(br, [2 * 0.3, 0.7])


def test_cartan_formula(deformed_geo):
    geo = deformed_geo
    for eta in (geo.omega, geo.Jtheta):
        res = conn.cartan_residual(geo.JT, eta)
        assert np.abs(res.val).max() < 1e-11


def test_covariant_derivative_of_j(hopf_geo):
    geo = hopf_geo
    # nabla_T J = 0 on an lcK manifold
    along_T = np.einsum("zi,zijk->zjk", geo.T.val, geo.nabla_J.val)
    assert np.abs(along_T).max() < 1e-12
    # sanity: nabla J is not identically zero on Hopf
    assert np.abs(geo.nabla_J.val).max() > 1e-3


def test_cov_deriv_vector_is_f(deformed_geo):
    geo = deformed_geo
    F2 = conn.cov_deriv_vector(geo.T, geo.gamma).val
    np.testing.assert_allclose(F2, geo.F.val, atol=1e-12)
    np.testing.assert_allclose(np.einsum("zii->z", geo.F.val), -geo.delta_theta.val, atol=1e-12)
    assert tn.apply_endo(geo.J, geo.T).shape == (4,)
