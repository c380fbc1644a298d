"""Pointwise multilinear algebra on a real 2n-dimensional chart.

Index conventions for jets:

* vectors ``X[i] = X^i``; 1-forms are :class:`~lckverify.forms.Form` objects;
* endomorphisms ``A[i, j] = A^i_j`` (row = output), so ``(A X)^i = A^i_j X^j``;
* the complex structure ``J`` is an endomorphism with ``J d/dx_k = d/dy_k``
  for coordinates ordered ``(x_1, y_1, ..., x_n, y_n)``;
* ``(J alpha)(X) = -alpha(J X)``, which makes ``J theta = T _| omega``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegeneracyError, StructureError
from .forms import Form
from .jets import Jet, constant_jet, jet_einsum, jet_inv

__all__ = [
    "standard_complex_structure",
    "sharp",
    "flat",
    "metric_inverse",
    "j_on_oneform",
    "apply_endo",
    "endo_two_tensor",
    "fundamental_form",
    "orthonormal_frame",
    "trace_omega",
    "lee_contraction",
    "g_norm",
    "check_compatible",
]


def standard_complex_structure(n):
    """Constant 2n x 2n matrix of J with J(d/dx_k) = d/dy_k."""
    d = 2 * n
    J = np.zeros((d, d))
    for k in range(n):
        x, y = 2 * k, 2 * k + 1
        J[y, x] = 1.0
        J[x, y] = -1.0
    return J


def metric_inverse(g):
    return jet_inv(g)


def sharp(ginv, alpha):
    """Raise a 1-form: alpha^# = g^{-1} alpha."""
    return jet_einsum("ij,j->i", ginv, alpha.packed)


def flat(g, X):
    """Lower a vector: X^b = g(X, .)."""
    return Form(1, jet_einsum("ij,i->j", g, X))


def j_on_oneform(J, alpha):
    """(J alpha)_j = -alpha_i J^i_j."""
    return Form(1, -jet_einsum("i,ij->j", alpha.packed, J))


def apply_endo(A, X):
    return jet_einsum("ij,j->i", A, X)


def endo_two_tensor(omega, A):
    """Dense (0,2) jet of omega(A., .), i.e. components A^k_i omega_kj.

    Not packed: the result is antisymmetric only when A is g-symmetric and commutes with J.
    """
    return jet_einsum("ki,kj->ij", A, omega.full())


def fundamental_form(g, J):
    """omega(X, Y) = g(JX, Y), antisymmetrised and packed."""
    w = jet_einsum("ki,kj->ij", J, g)
    return Form.from_full((w - w.transpose(1, 0)) * 0.5, 2)


def check_compatible(g_val, J_val, tol=1e-8):
    """Raise StructureError unless g(J., J.) = g at every point (relative max-norm)."""
    gJJ = np.einsum("zki,zkl,zlj->zij", J_val, g_val, J_val)
    scale = np.max(np.abs(g_val), axis=(1, 2))
    err = np.max(np.abs(gJJ - g_val), axis=(1, 2)) / scale
    worst = float(np.max(err)) if err.size else 0.0
    if worst > tol:
        raise StructureError(f"g and J are not compatible: max relative |g(J.,J.) - g| = {worst:.3e}")
    return worst


def orthonormal_frame(g_val):
    """Gram-Schmidt of the coordinate frame, batched.

    Returns ``E`` of shape (N, 2n, 2n) with ``E[:, a]`` the a-th frame vector
    (coordinate components).  Deterministic given coordinate order.
    """
    g_val = np.asarray(g_val, dtype=float)
    n, d, _ = g_val.shape
    E = np.zeros((n, d, d))
    scale = np.max(np.abs(g_val), axis=(1, 2))
    for a in range(d):
        v = np.zeros((n, d))
        v[:, a] = 1.0
        # modified Gram-Schmidt, twice for stability
        for _ in range(2):
            for b in range(a):
                proj = np.einsum("zi,zij,zj->z", E[:, b], g_val, v)
                v = v - proj[:, None] * E[:, b]
        nrm2 = np.einsum("zi,zij,zj->z", v, g_val, v)
        if np.any(nrm2 <= 1e-14 * scale):
            raise DegeneracyError("coordinate frame lost rank during Gram-Schmidt")
        E[:, a] = v / np.sqrt(nrm2)[:, None]
    return E


def trace_omega(eta_full, J_val, ginv_val, g_val=None, frame=None):
    """Tr_omega(eta) = sum_i eta(e_i, J e_i), both by an orthonormal frame and frame-free.

    ``eta_full`` is a dense (N, d, d) array.  Returns ``(frame_sum, contraction)``.
    """
    eta_full = np.asarray(eta_full, dtype=float)
    contraction = np.einsum("zab,zcb,zac->z", ginv_val, J_val, eta_full)
    if frame is None:
        if g_val is None:
            return None, contraction
        frame = orthonormal_frame(g_val)
    Je = np.einsum("zij,zaj->zai", J_val, frame)
    frame_sum = np.einsum("zai,zij,zaj->z", frame, eta_full, Je)
    return frame_sum, contraction


def lee_contraction(domega, J, ginv, n):
    """Recover theta from d omega: theta(X) = sum_i d omega(X, e_i, J e_i) / (2n - 2)."""
    if n < 2:
        raise StructureError("Lee form recovery needs complex dimension n >= 2")
    t = jet_einsum("ab,cb,kac->k", ginv, J, domega.full())
    return Form(1, t * (1.0 / (2 * n - 2)))


def g_norm(tensor, variance, g_val, ginv_val, form_degree=0):
    """Pointwise g-norm of a dense tensor array (N, *S).

    ``variance`` has one letter per tensor axis: ``'l'`` for covariant (lower)
    slots and ``'u'`` for contravariant slots.  For forms pass
    ``form_degree=k`` to apply the 1/k! normalisation.
    """
    t = np.asarray(tensor, dtype=float)
    if t.ndim - 1 != len(variance):
        raise ValueError(f"variance {variance!r} does not match tensor rank {t.ndim - 1}")
    raised = t
    for ax, kind in enumerate(variance):
        m = ginv_val if kind == "l" else g_val
        raised = _contract_axis(m, raised, ax + 1)
    sq = np.sum((t * raised).reshape(t.shape[0], -1), axis=1)
    if form_degree:
        sq = sq / math.factorial(form_degree)
    return np.sqrt(np.maximum(sq, 0.0))


def _contract_axis(m, t, axis):
    """Apply the per-point matrix m (N, d, d) to tensor axis ``axis`` of t."""
    moved = np.moveaxis(t, axis, -1)
    out = np.einsum("z...b,zab->z...a", moved, m)
    return np.moveaxis(out, -1, axis)


def identity_jet(npoints, d, order=2):
    return constant_jet(np.broadcast_to(np.eye(d), (npoints, d, d)).copy(), d, order)
