import numpy as np
import pytest

from lckverify import tensors as tn
from lckverify.anchors import P0
from lckverify.errors import DegeneracyError, StructureError
from lckverify.forms import Form, interior, wedge
from lckverify.jets import constant_jet
from lckverify.lck import Geometry


def test_standard_j_squares_to_minus_one():
    J = tn.standard_complex_structure(3)
    np.testing.assert_array_equal(J @ J, -np.eye(6))
    assert J[1, 0] == 1.0 and J[0, 1] == -1.0


def test_flat_fundamental_form(flat2):
    om = flat2.omega.value(np.array([[1.0, 2.0, 3.0, 4.0]]))[0]
    # packed order: 01 02 03 12 13 23
    np.testing.assert_array_equal(om, [1.0, 0, 0, 0, 0, 1.0])


def test_hopf_quantities_at_p0(hopf2):
    geo = Geometry(hopf2, P0)
    np.testing.assert_allclose(geo.g_val[0], 4.0 * np.eye(4))
    assert geo.g.grad[0, 0, 0, 0] == pytest.approx(-8.0)
    np.testing.assert_allclose(geo.omega.packed.val[0], [4.0, 0, 0, 0, 0, 4.0])
    np.testing.assert_allclose(geo.theta.packed.val[0], [-2.0, 0, 0, 0])
    np.testing.assert_allclose(geo.T.val[0], [-0.5, 0, 0, 0])
    np.testing.assert_allclose(geo.Jtheta.packed.val[0], [0, -2.0, 0, 0])
    np.testing.assert_allclose(interior(geo.T, geo.omega).packed.val[0], [0, -2.0, 0, 0])
    tj = wedge(geo.theta, geo.Jtheta).full().val[0]
    assert tj[0, 1] == pytest.approx(4.0)


def test_sharp_flat_roundtrip(hopf_geo):
    back = tn.flat(hopf_geo.g, hopf_geo.T)
    np.testing.assert_allclose(back.packed.val, hopf_geo.theta.packed.val, atol=1e-14)


def test_j_on_oneform_squares_to_minus_one(deformed_geo):
    a = deformed_geo.theta
    twice = tn.j_on_oneform(deformed_geo.J, tn.j_on_oneform(deformed_geo.J, a))
    np.testing.assert_allclose(twice.packed.val, -a.packed.val, atol=1e-15)


def test_orthonormal_frame(hopf2, deformed_geo):
    E = tn.orthonormal_frame(Geometry(hopf2, P0).g_val)
    np.testing.assert_allclose(E[0], 0.5 * np.eye(4))
    E = deformed_geo.frame
    gram = np.einsum("zai,zij,zbj->zab", E, deformed_geo.g_val, E)
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(4), gram.shape), atol=1e-12)


def test_orthonormal_frame_degenerate():
    with pytest.raises(DegeneracyError):
        tn.orthonormal_frame(np.zeros((1, 2, 2)) + np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_trace_omega_values(hopf_geo):
    geo = hopf_geo
    for eta, want in ((geo.omega, 4.0), (wedge(geo.theta, geo.Jtheta), 2.0), (geo.dJtheta, -2.0)):
        fs, ct = tn.trace_omega(eta.full().val, geo.J.val, geo.ginv_val, g_val=geo.g_val)
        np.testing.assert_allclose(ct, want, atol=1e-12)
        np.testing.assert_allclose(fs, want, atol=1e-12)


def test_g_norm_scaling(hopf_geo):
    # |theta| = 1 on Hopf; a 2-form norm uses the 1/2! convention so |omega|^2 = n
    np.testing.assert_allclose(hopf_geo.form_norm(hopf_geo.theta), 1.0, rtol=1e-14)
    np.testing.assert_allclose(hopf_geo.form_norm(hopf_geo.omega), np.sqrt(2.0), rtol=1e-14)
    with pytest.raises(ValueError):
        hopf_geo.norm(hopf_geo.g, "l")


def test_check_compatible_rejects():
    g = np.array([[[1.0, 0, 0, 0], [0, 2.0, 0, 0], [0, 0, 1.0, 0], [0, 0, 0, 1.0]]])
    with pytest.raises(StructureError):
        tn.check_compatible(g, tn.standard_complex_structure(2)[None])


def test_lee_contraction_needs_n2():
    J = constant_jet(tn.standard_complex_structure(1)[None], 2)
    with pytest.raises(StructureError):
        tn.lee_contraction(None, J, J, 1)
