"""Levi-Civita connection and the first/second-order differential operators built on it.

All operators act on jets.  Each derivative consumes one jet order, so an
order-2 metric yields order-1 Christoffel symbols, whose covariant derivatives
can be differentiated once more.

Index layout: ``Gamma[k, i, j] = Gamma^k_ij``; ``nabla alpha[i, j] = (nabla_i alpha)_j``;
for a vector X the endomorphism ``nabla X[j, i] = nabla_i X^j`` (so it acts on
the direction by ordinary matrix-vector product).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import Form, exterior_d, interior
from .jets import Jet, jet_einsum

__all__ = [
    "christoffel",
    "metricity_residual",
    "cov_deriv_oneform",
    "cov_deriv_vector",
    "cov_deriv_endo",
    "SecondFundamentalData",
    "second_fundamental",
    "exterior_d",
    "lie_derivative_function",
    "lie_derivative_vector",
    "lie_derivative_covariant",
    "lie_derivative_form",
    "lie_derivative_endo",
    "cartan_residual",
    "codifferential",
    "codifferential_divergence",
    "laplacian",
    "laplacian_divergence",
]


def christoffel(g, ginv):
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij).

    Symmetric in (i, j) exactly: the lower-index part is assembled as a sum of a
    tensor and its (i, j) transpose.
    """
    dg = g.partial()                                  # dg[a, b, c] = d_c g_ab
    half = jet_einsum("jli->lij", dg)                  # d_i g_jl
    lower = half + half.transpose(0, 2, 1) - jet_einsum("ijl->lij", dg)
    return jet_einsum("kl,lij->kij", ginv, lower) * 0.5


def metricity_residual(g, gamma):
    """(nabla_i g)_jk = d_i g_jk - Gamma^l_ij g_lk - Gamma^l_ik g_jl, as a dense [i, j, k] jet."""
    dg = jet_einsum("jki->ijk", g.partial())
    t = jet_einsum("lij,lk->ijk", gamma, g)
    return dg - t - t.transpose(0, 2, 1)


def cov_deriv_oneform(alpha, gamma):
    """(nabla alpha)[i, j] = d_i alpha_j - Gamma^k_ij alpha_k."""
    da = jet_einsum("ji->ij", alpha.packed.partial())
    return da - jet_einsum("kij,k->ij", gamma, alpha.packed)


def cov_deriv_vector(X, gamma):
    """(nabla X)[j, i] = d_i X^j + Gamma^j_ik X^k."""
    return X.partial() + jet_einsum("jik,k->ji", gamma, X)


def cov_deriv_endo(A, gamma):
    """(nabla A)[i, j, k] = (nabla_i A)^j_k = d_i A^j_k + Gamma^j_il A^l_k - Gamma^l_ik A^j_l."""
    dA = jet_einsum("jki->ijk", A.partial())
    return dA + jet_einsum("jil,lk->ijk", gamma, A) - jet_einsum("lik,jl->ijk", gamma, A)


@dataclass(frozen=True)
class SecondFundamentalData:
    """S(X, Y) = (nabla_X theta)(Y) and the endomorphism F = nabla T with g(FX, Y) = S(X, Y)."""

    S: Jet
    F: Jet


def second_fundamental(theta, ginv, gamma):
    S = cov_deriv_oneform(theta, gamma)
    # F^j_i = g^jl S_il
    F = jet_einsum("jl,il->ji", ginv, S)
    return SecondFundamentalData(S=S, F=F)


# -- Lie derivatives (coordinate formulas) --------------------------------------

def lie_derivative_function(X, f):
    """X(f) = X^i d_i f."""
    return jet_einsum("i,i->", X, f.partial())


def lie_derivative_vector(X, Y):
    """[X, Y]^i = X^k d_k Y^i - Y^k d_k X^i."""
    return jet_einsum("k,ik->i", X, Y.partial()) - jet_einsum("k,ik->i", Y, X.partial())


def lie_derivative_covariant(X, t):
    """Lie derivative of a dense covariant tensor jet of any rank.

    (L_X t)_{i1..ik} = X^m d_m t_{i1..ik} + sum_s t_{..m..} d_{i_s} X^m.
    """
    rank = len(t.shape)
    letters = "abcdefgh"[:rank]
    out = jet_einsum(f"m,{letters}m->{letters}", X, t.partial())
    dX = X.partial()                                   # dX[m, i] = d_i X^m
    for s in range(rank):
        src = letters[:s] + "m" + letters[s + 1:]
        out = out + jet_einsum(f"{src},m{letters[s]}->{letters}", t, dX)
    return out


def lie_derivative_form(X, eta):
    return Form.from_full(lie_derivative_covariant(X, eta.full()), eta.degree)


def lie_derivative_endo(X, A):
    """(L_X A)^i_j = X^k d_k A^i_j - A^k_j d_k X^i + A^i_k d_j X^k."""
    dX = X.partial()
    return (jet_einsum("k,ijk->ij", X, A.partial())
            - jet_einsum("kj,ik->ij", A, dX)
            + jet_einsum("ik,kj->ij", A, dX))


def cartan_residual(X, eta):
    """L_X eta - d(X _| eta) - X _| d eta (dense jet; vanishes for forms of degree >= 1)."""
    lhs = lie_derivative_form(X, eta)
    inner = interior(X, eta)
    d_inner = exterior_d(inner)
    rhs = d_inner + interior(X, exterior_d(eta))
    return (lhs - rhs).full()


# -- codifferential and Laplacian ------------------------------------------------

def codifferential(alpha, ginv, gamma):
    """delta alpha = -g^ij (nabla alpha)_ij."""
    return -jet_einsum("ij,ij->", ginv, cov_deriv_oneform(alpha, gamma))


def _half_dlogdet(g, ginv):
    """d_i log sqrt(det g) = 1/2 g^ab d_i g_ab."""
    return jet_einsum("ab,abi->i", ginv, g.partial()) * 0.5


def codifferential_divergence(alpha, g, ginv):
    """delta alpha = -(1/sqrt det g) d_i(sqrt det g g^ij alpha_j); divergence-form oracle."""
    V = jet_einsum("ij,j->i", ginv, alpha.packed)
    div = jet_einsum("ii->", V.partial()) + jet_einsum("i,i->", V, _half_dlogdet(g, ginv))
    return -div


def laplacian(h, ginv, gamma):
    """Delta h = delta d h = -g^ij (d_i d_j h - Gamma^k_ij d_k h); positive spectrum."""
    dh = h.partial()
    hess = dh.partial()
    return -jet_einsum("ij,ij->", ginv, hess - jet_einsum("kij,k->ij", gamma, dh))


def laplacian_divergence(h, g, ginv):
    """Delta h = -(1/sqrt det g) d_i(sqrt det g g^ij d_j h); divergence-form oracle."""
    return codifferential_divergence(Form(1, h.partial()), g, ginv)


def symmetric_residual(t):
    """t - t^T for a dense (d, d) jet value."""
    v = t.val if isinstance(t, Jet) else np.asarray(t)
    return v - np.swapaxes(v, -1, -2)
