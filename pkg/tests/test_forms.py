import numpy as np
import pytest

from lckverify.errors import DegreeError
from lckverify.forms import Form, exterior_d, interior, wedge
from lckverify.jets import constant_jet, coords_jet, jet_einsum

P = np.array([[0.3, -0.8, 1.1, 0.5], [1.4, 0.2, -0.6, 0.9]])


def const_form(vec, degree=1, order=0):
    v = np.broadcast_to(np.asarray(vec, dtype=float), (len(P), len(vec))).copy()
    return Form(degree, constant_jet(v, 4, order))


def dx(k):
    v = np.zeros(4)
    v[k] = 1.0
    return const_form(v)


def poly_oneform(x):
    return Form(1, jet_einsum("i,ij->j", x, np.arange(16.0).reshape(4, 4)) * (x[0] * x[1] + 1.0))


def test_wedge_convention():
    e = wedge(dx(0), dx(1)).full().val[0]
    assert e[0, 1] == 1.0 and e[1, 0] == -1.0


def test_alpha_wedge_alpha_vanishes():
    a = poly_oneform(coords_jet(P))
    w = wedge(a, a)
    assert np.all(w.packed.val == 0.0)


def test_wedge_graded_commutativity():
    x = coords_jet(P)
    a, b = poly_oneform(x), Form(1, x * x[2])
    ab = wedge(a, b).packed.val
    np.testing.assert_allclose(ab, -wedge(b, a).packed.val, atol=1e-13)
    c = wedge(a, b)
    np.testing.assert_allclose(wedge(c, a).packed.val, wedge(a, c).packed.val, atol=1e-12)


def test_pack_roundtrip():
    x = coords_jet(P)
    two = wedge(poly_oneform(x), Form(1, x))
    again = Form.from_full(two.full(), 2)
    np.testing.assert_array_equal(again.packed.val, two.packed.val)
    np.testing.assert_array_equal(again.packed.hess, two.packed.hess)


def test_d_squared_zero():
    x = coords_jet(P)
    a = poly_oneform(x)
    np.testing.assert_allclose(exterior_d(exterior_d(a)).packed.val, 0.0, atol=1e-12)
    f = x[0] * x[1] * x[3]
    np.testing.assert_allclose(exterior_d(exterior_d(f)).packed.val, 0.0, atol=1e-14)


def test_d_of_coordinate_differential():
    assert not exterior_d(const_form([1.0, 0, 0, 0], order=1)).packed.val.any()


def test_d_leibniz():
    x = coords_jet(P)
    a, b = poly_oneform(x), Form(1, x * x[2])
    lhs = exterior_d(wedge(a, b)).packed.val
    rhs = wedge(exterior_d(a), b.truncate(1)).packed.val - wedge(a.truncate(1), exterior_d(b)).packed.val
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-11)


def test_interior_antiderivation():
    x = coords_jet(P)
    X = x * 0.5 + 1.0
    th = poly_oneform(x)
    om = wedge(Form(1, x), const_form([0, 1.0, 0, 0], order=2)) + wedge(dx(2), dx(3)) * 2.0
    lhs = interior(X, wedge(th, om)).packed.val
    rhs = (om * interior(X, th) - wedge(th, interior(X, om))).packed.val
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_interior_of_oneform_is_pairing():
    x = coords_jet(P)
    v = interior(x, Form(1, x))
    np.testing.assert_allclose(v.val, (P ** 2).sum(1))


def test_degree_errors():
    with pytest.raises(DegreeError):
        wedge(wedge(dx(0), dx(1)), wedge(dx(2), dx(3)))
    with pytest.raises(DegreeError):
        dx(0) + wedge(dx(0), dx(1))
    with pytest.raises(ValueError):
        Form(2, constant_jet(np.zeros((2, 4)), 4))
