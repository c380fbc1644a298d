"""Differential forms in canonical ordered-index storage.

A k-form on a d-dimensional chart is stored as its ``C(d, k)`` components
``eta[I]`` for strictly increasing multi-indices ``I``.  :meth:`Form.full`
expands to the dense antisymmetric array by gathering with signs, so swapping
two arguments negates a value exactly.

Conventions (determinant normalisation)::

    (a ^ b)(X, Y)      = a(X) b(Y) - a(Y) b(X)
    (t ^ w)(X, Y, Z)   = t(X) w(Y, Z) + t(Y) w(Z, X) + t(Z) w(X, Y)
    (X _| eta)(Y, ...) = eta(X, Y, ...)
    (d a)_ij           = d_i a_j - d_j a_i
    (d eta)_ijk        = d_i eta_jk + d_j eta_ki + d_k eta_ij
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .errors import DegreeError
from .jets import Jet, jet_einsum

__all__ = ["Form", "wedge", "interior", "exterior_d", "MAX_DEGREE"]

# d is applied to forms of degree <= MAX_DEGREE (so d(d omega) is reachable)
MAX_DEGREE = 3


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _combos(d, k):
    return tuple(combinations(range(d), k))


@lru_cache(maxsize=None)
def _position(d, k):
    return {c: i for i, c in enumerate(_combos(d, k))}


@lru_cache(maxsize=None)
def _expand_maps(d, k):
    """Index and sign arrays of shape (d,)*k mapping dense entries to packed slots."""
    idx = np.zeros((d,) * k, dtype=np.intp)
    sgn = np.zeros((d,) * k)
    pos = _position(d, k)
    for dense in np.ndindex(*((d,) * k)):
        if len(set(dense)) < k:
            continue
        key = tuple(sorted(dense))
        idx[dense] = pos[key]
        sgn[dense] = _perm_sign(dense)
    return idx, sgn


@lru_cache(maxsize=None)
def _wedge_table(d, k, l):
    """Constant tensor W[I, J, K] = sign of the shuffle J + K -> I."""
    out = _position(d, k + l)
    table = np.zeros((comb(d, k + l), comb(d, k), comb(d, l)))
    for jn, J in enumerate(_combos(d, k)):
        for kn, K in enumerate(_combos(d, l)):
            if set(J) & set(K):
                continue
            merged = J + K
            table[out[tuple(sorted(merged))], jn, kn] = _perm_sign(merged)
    return table


@lru_cache(maxsize=None)
def _d_table(d, k):
    """Constant tensor D[I, J, m] with (d eta)_I = sum D[I, J, m] * d_m eta_J."""
    src = _position(d, k)
    table = np.zeros((comb(d, k + 1), comb(d, k), d))
    for on, I in enumerate(_combos(d, k + 1)):
        for m, i_m in enumerate(I):
            rest = I[:m] + I[m + 1:]
            table[on, src[rest], i_m] = (-1.0) ** m
    return table


@lru_cache(maxsize=None)
def _interior_table(d, k):
    """Constant tensor P[J, i, I] with (X _| eta)_J = sum X^i P[J, i, I] eta_I."""
    src = _position(d, k)
    table = np.zeros((comb(d, k - 1), d, comb(d, k)))
    for jn, J in enumerate(_combos(d, k - 1)):
        for i in range(d):
            if i in J:
                continue
            merged = (i,) + J
            table[jn, i, src[tuple(sorted(merged))]] = _perm_sign(merged)
    return table


class Form:
    """A k-form evaluated as a jet of its packed components (shape ``(C(d, k),)``)."""

    __slots__ = ("degree", "packed")

    def __init__(self, degree, packed):
        d = packed.dim
        if not 0 <= degree <= d:
            raise DegreeError(f"degree {degree} out of range for dimension {d}")
        if packed.shape != (comb(d, degree),):
            raise ValueError(f"packed {degree}-form in dim {d} needs shape ({comb(d, degree)},), got {packed.shape}")
        self.degree = degree
        self.packed = packed

    @property
    def dim(self):
        return self.packed.dim

    @property
    def order(self):
        return self.packed.order

    def __repr__(self):
        return f"Form(degree={self.degree}, dim={self.dim}, order={self.order})"

    @classmethod
    def from_full(cls, jet, degree=None):
        """Pack a dense jet, keeping only strictly increasing index entries."""
        k = len(jet.shape) if degree is None else degree
        if len(jet.shape) != k:
            raise ValueError(f"dense {k}-form needs {k} tensor axes, got {jet.shape}")
        if k == 0:
            raise DegreeError("0-forms are plain scalar jets")
        combos = np.array(_combos(jet.dim, k), dtype=np.intp).reshape(-1, k)
        key = tuple(combos[:, m] for m in range(k))
        return cls(k, jet[key])

    def full(self):
        """Dense antisymmetric jet with ``degree`` tensor axes."""
        d, k = self.dim, self.degree
        idx, sgn = _expand_maps(d, k)

        def expand(arr, extra):
            out = arr[:, idx]
            return out * sgn.reshape(sgn.shape + (1,) * extra)

        return self.packed.map_linear(expand)

    def truncate(self, order):
        return Form(self.degree, self.packed.truncate(order))

    def _check(self, other):
        if not isinstance(other, Form) or other.degree != self.degree:
            raise DegreeError("form arithmetic needs forms of equal degree")

    def __add__(self, other):
        self._check(other)
        return Form(self.degree, self.packed + other.packed)

    def __sub__(self, other):
        self._check(other)
        return Form(self.degree, self.packed - other.packed)

    def __neg__(self):
        return Form(self.degree, -self.packed)

    def __mul__(self, scalar):
        """Multiply by a number or a scalar-valued jet (function)."""
        if isinstance(scalar, Jet) and scalar.shape != ():
            raise ValueError("forms multiply only by scalar jets")
        return Form(self.degree, self.packed * scalar)

    __rmul__ = __mul__


def wedge(alpha, beta):
    """Exterior product of two forms (determinant normalisation)."""
    k, l = alpha.degree, beta.degree
    if k + l > alpha.dim:
        raise DegreeError(f"wedge of degrees {k} and {l} overflows dimension {alpha.dim}")
    if k + l > MAX_DEGREE:
        raise DegreeError(f"wedge degree {k + l} exceeds supported maximum {MAX_DEGREE}")
    table = _wedge_table(alpha.dim, k, l)
    return Form(k + l, jet_einsum("ojk,j,k->o", table, alpha.packed, beta.packed))


def interior(vector, eta):
    """Insert a vector jet (shape (d,)) into the first slot of a form.

    For a 1-form the result is the scalar jet ``eta(X)``.
    """
    k = eta.degree
    if not 1 <= k <= MAX_DEGREE + 1:
        raise DegreeError(f"interior product needs degree 1..{MAX_DEGREE + 1}, got {k}")
    if k == 1:
        return jet_einsum("i,i->", vector, eta.packed)
    table = _interior_table(eta.dim, k)
    return Form(k - 1, jet_einsum("jic,i,c->j", table, vector, eta.packed))


def exterior_d(eta):
    """Exterior derivative of a scalar jet (0-form) or a form of degree <= MAX_DEGREE."""
    if isinstance(eta, Jet):
        if eta.shape != ():
            raise DegreeError("only scalar jets are 0-forms")
        return Form(1, eta.partial())
    k = eta.degree
    if k > MAX_DEGREE:
        raise DegreeError(f"exterior derivative supports degree <= {MAX_DEGREE}, got {k}")
    table = _d_table(eta.dim, k)
    return Form(k + 1, jet_einsum("ojm,jm->o", table, eta.packed.partial()))
