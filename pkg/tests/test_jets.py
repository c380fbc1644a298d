import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lckverify.errors import DegeneracyError, JetOrderError
from lckverify.jets import Jet, constant_jet, coords_jet, fd_jet, jet_einsum, jet_inv, stack_jets


def poly(x):
    # scalar test function built only from jet arithmetic
    return x[0] * x[0] * x[1] + (x[2] * 0.5).sin() * x[3] + (x[0] * x[3] + 2.0).log()


def poly_np(p):
    x0, x1, x2, x3 = p.T
    return x0 * x0 * x1 + np.sin(0.5 * x2) * x3 + np.log(x0 * x3 + 2.0)


def test_coords_jet_seed():
    pts = np.array([[1.0, 2.0, 3.0]])
    x = coords_jet(pts)
    assert x.shape == (3,) and x.order == 2
    np.testing.assert_array_equal(x.grad[0], np.eye(3))
    assert not x.hess.any()


def test_constant_jet_has_no_derivatives():
    c = constant_jet(np.ones((5, 2, 2)), 4)
    assert c.order == 2 and not c.grad.any() and not c.hess.any()


def test_ad_matches_closed_form():
    pts = np.array([[0.3, -1.2, 0.7, 0.9], [1.1, 0.4, -0.2, 0.5]])
    f = poly(coords_jet(pts))
    x0, x1, x2, x3 = pts.T
    np.testing.assert_allclose(f.val, poly_np(pts), rtol=1e-15)
    u = x0 * x3 + 2.0
    grad = np.stack([2 * x0 * x1 + x3 / u, x0 * x0, 0.5 * np.cos(0.5 * x2) * x3, np.sin(0.5 * x2) + x0 / u], 1)
    np.testing.assert_allclose(f.grad, grad, rtol=1e-14)
    assert f.hess[0, 0, 1] == pytest.approx(2 * x0[0])
    assert f.hess[0, 2, 2] == pytest.approx(-0.25 * np.sin(0.5 * x2[0]) * x3[0])


def test_hessian_is_symmetric():
    pts = np.random.default_rng(0).normal(size=(7, 4)) + 3.0
    f = poly(coords_jet(pts))
    np.testing.assert_array_equal(f.hess, np.swapaxes(f.hess, -1, -2))


def test_ad_vs_fd():
    pts = np.array([[0.3, -1.2, 0.7, 0.9], [1.1, 0.4, -0.2, 0.5]])
    ad = poly(coords_jet(pts))
    fd = fd_jet(poly_np, pts, step=1e-3)
    np.testing.assert_allclose(fd.grad, ad.grad, atol=1e-9)
    np.testing.assert_allclose(fd.hess, ad.hess, atol=1e-7)


def test_partial_lowers_order():
    x = coords_jet(np.ones((2, 3)))
    f = x[0] * x[1]
    df = f.partial()
    assert df.order == 1 and df.shape == (3,)
    assert df.partial().order == 0
    with pytest.raises(JetOrderError):
        df.partial().partial()


def test_jet_einsum_product_rule_against_elementwise():
    pts = np.random.default_rng(2).normal(size=(5, 3))
    x = coords_jet(pts)
    dot = jet_einsum("i,i->", x, x)
    manual = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    for a, b in zip((dot.val, dot.grad, dot.hess), (manual.val, manual.grad, manual.hess)):
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=1e-15)


def test_jet_einsum_with_constant_and_three_operands():
    pts = np.random.default_rng(3).normal(size=(4, 2))
    x = coords_jet(pts)
    M = np.array([[1.0, 2.0], [0.5, -1.0]])
    q = jet_einsum("i,ij,j->", x, M, x)
    ref = x[0] * x[0] * 1.0 + x[0] * x[1] * 2.5 - x[1] * x[1]
    np.testing.assert_allclose(q.hess, ref.hess, atol=1e-14)
    with pytest.raises(ValueError):
        jet_einsum("I,i->", x, x)


def test_jet_inv_derivatives_by_fd():
    pts = np.array([[0.4, 0.2], [1.3, -0.7]])

    def mat(x):
        return stack_jets([stack_jets([x[0] * x[0] + 2.0, x[0] * x[1]]),
                           stack_jets([x[0] * x[1], x[1].exp() + 1.0])])

    inv = jet_inv(mat(coords_jet(pts)))
    fd = fd_jet(lambda p: np.linalg.inv(mat(coords_jet(p, 0)).val), pts, step=1e-3)
    np.testing.assert_allclose(inv.grad, fd.grad, atol=1e-9)
    np.testing.assert_allclose(inv.hess, fd.hess, atol=1e-7)


def test_jet_inv_singular():
    z = constant_jet(np.zeros((1, 2, 2)), 2)
    with pytest.raises(DegeneracyError):
        jet_inv(z)


def test_scalar_broadcast_multiplication():
    x = coords_jet(np.array([[1.0, 2.0]]))
    r2 = x[0] * x[0] + x[1] * x[1]
    y = x * r2
    assert y.shape == (2,)
    np.testing.assert_allclose(y.grad[0, 0], [3 * 1 + 4, 2 * 1 * 2])


finite = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (3, 3), elements=finite))
def test_leibniz_and_linearity(p):
    x = coords_jet(p)
    f, g = x[0] * x[1] + x[2], (x[1] * 0.3).cos()
    prod = f * g
    ref_grad = f.grad * g.val[:, None] + f.val[:, None] * g.grad
    np.testing.assert_allclose(prod.grad, ref_grad, rtol=1e-12, atol=1e-14)
    lin = f * 2.0 - g * 3.0
    np.testing.assert_allclose(lin.hess, 2.0 * f.hess - 3.0 * g.hess, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 3), elements=st.floats(min_value=0.2, max_value=3.0)))
def test_chain_rule_inverses(p):
    x = coords_jet(p)
    y = x[0].log().exp()
    np.testing.assert_allclose(y.val, x[0].val, rtol=1e-13)
    np.testing.assert_allclose(y.grad, x[0].grad, atol=1e-13)
    np.testing.assert_allclose(y.hess, 0.0, atol=1e-12)
    s = (x[1] * x[1]).sqrt()
    np.testing.assert_allclose(s.grad[:, 1], 1.0, rtol=1e-13)
