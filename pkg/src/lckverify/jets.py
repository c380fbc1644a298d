"""Batched order-2 jets: tensor values with first and second coordinate derivatives.

A :class:`Jet` holds, for a batch of ``N`` chart points, a tensor of shape ``S``
together with its gradient and Hessian with respect to the ``d`` chart
coordinates::

    val  : (N, *S)
    grad : (N, *S, d)        or None   (order >= 1)
    hess : (N, *S, d, d)     or None   (order == 2)

Arithmetic propagates derivatives by the product and chain rules (truncated
Taylor arithmetic).  The order of a result is the minimum order of its
operands; :meth:`Jet.partial` moves one derivative into a new tensor axis and
lowers the order by one.  Hessians are symmetric exactly, not to a tolerance.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import JetOrderError

__all__ = ["Jet", "coords_jet", "jet_einsum", "jet_inv", "constant_jet", "stack_jets", "fd_jet"]


def _sym(h):
    # (a + b) * 0.5 == (b + a) * 0.5 bit for bit, so the result is exactly symmetric
    return 0.5 * (h + np.swapaxes(h, -1, -2))


class Jet:
    __slots__ = ("val", "grad", "hess", "dim")

    def __init__(self, val, grad=None, hess=None, dim=None, *, symmetrize=True):
        self.val = np.asarray(val, dtype=float)
        if hess is not None and grad is None:
            raise ValueError("a jet with a Hessian must also carry a gradient")
        self.grad = None if grad is None else np.asarray(grad, dtype=float)
        if hess is not None:
            hess = np.asarray(hess, dtype=float)
            if symmetrize:
                hess = _sym(hess)
        self.hess = hess
        if self.grad is not None:
            dim = self.grad.shape[-1]
        if dim is None:
            raise ValueError("order-0 jets need an explicit dim")
        self.dim = int(dim)

    # -- shape bookkeeping -------------------------------------------------
    @property
    def order(self):
        if self.hess is not None:
            return 2
        return 1 if self.grad is not None else 0

    @property
    def shape(self):
        return self.val.shape[1:]

    @property
    def npoints(self):
        return self.val.shape[0]

    def __repr__(self):
        return f"Jet(shape={self.shape}, npoints={self.npoints}, order={self.order}, dim={self.dim})"

    def truncate(self, order):
        order = min(order, self.order)
        return Jet(self.val,
                   self.grad if order >= 1 else None,
                   self.hess if order >= 2 else None,
                   dim=self.dim, symmetrize=False)

    def _parts(self):
        return self.val, self.grad, self.hess

    def map_linear(self, fn):
        """Apply a tensor-axis linear map (index, transpose, sign) to every part.

        ``fn(arr, extra)`` receives an array with ``extra`` trailing derivative axes.
        """
        g = None if self.grad is None else fn(self.grad, 1)
        h = None if self.hess is None else fn(self.hess, 2)
        return Jet(fn(self.val, 0), g, h, dim=self.dim, symmetrize=False)

    def transpose(self, *perm):
        k = len(self.shape)
        if sorted(perm) != list(range(k)):
            raise ValueError(f"bad permutation {perm} for tensor rank {k}")

        def tr(a, extra):
            axes = (0,) + tuple(p + 1 for p in perm) + tuple(range(k + 1, k + 1 + extra))
            return np.transpose(a, axes)

        return self.map_linear(tr)

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        key = (slice(None),) + idx
        return self.map_linear(lambda a, extra: a[key])

    # -- derivatives ---------------------------------------------------------
    def partial(self):
        """Jet of the coordinate derivative, with the derivative index appended last."""
        if self.grad is None:
            raise JetOrderError("cannot differentiate an order-0 jet")
        return Jet(self.grad, self.hess, None, dim=self.dim, symmetrize=False)

    # -- arithmetic ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        other = np.asarray(other, dtype=float)
        val = np.broadcast_to(other, self.val.shape)
        return constant_jet(val, self.dim, order=self.order)

    def _binary_add(self, other, sign):
        other = self._coerce(other)
        order = min(self.order, other.order)
        val = self.val + sign * other.val
        grad = self.grad + sign * other.grad if order >= 1 else None
        hess = self.hess + sign * other.hess if order >= 2 else None
        return Jet(val, grad, hess, dim=self.dim, symmetrize=False)

    def __add__(self, other):
        return self._binary_add(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary_add(other, -1.0)

    def __rsub__(self, other):
        return (-self)._binary_add(other, 1.0)

    def __neg__(self):
        return self.map_linear(lambda a, extra: -a)

    def _expand_scalar(self, target_rank):
        """View a scalar jet with singleton tensor axes so it broadcasts against rank-k jets."""
        pad = (1,) * target_rank

        def rs(a, extra):
            n = a.shape[0]
            return a.reshape((n,) + pad + a.shape[1:])

        return self.map_linear(rs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            if c.ndim == 0:
                return self.map_linear(lambda a, extra: a * c)
            other = self._coerce(other)
        a, b = self, other
        if a.shape != b.shape:
            if a.shape == ():
                a = a._expand_scalar(len(b.shape))
            elif b.shape == ():
                b = b._expand_scalar(len(a.shape))
            else:
                raise ValueError(f"elementwise product needs equal shapes or a scalar, got {a.shape} and {b.shape}")
        order = min(a.order, b.order)
        val = a.val * b.val
        grad = hess = None
        if order >= 1:
            grad = a.grad * b.val[..., None] + a.val[..., None] * b.grad
        if order >= 2:
            cross = a.grad[..., :, None] * b.grad[..., None, :]
            hess = (a.hess * b.val[..., None, None] + a.val[..., None, None] * b.hess
                    + cross + np.swapaxes(cross, -1, -2))
        return Jet(val, grad, hess, dim=self.dim, symmetrize=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        p = float(p)
        v = self.val
        return self.apply(v ** p, p * v ** (p - 1.0), p * (p - 1.0) * v ** (p - 2.0))

    # -- elementwise chain rule ---------------------------------------------
    def apply(self, f0, f1, f2):
        """Compose with a univariate function given its value and first two derivatives at ``val``."""
        f0 = np.asarray(f0, dtype=float)
        grad = hess = None
        if self.order >= 1:
            grad = f1[..., None] * self.grad
        if self.order >= 2:
            hess = (f2[..., None, None] * (self.grad[..., :, None] * self.grad[..., None, :])
                    + f1[..., None, None] * self.hess)
        return Jet(f0, grad, hess, dim=self.dim, symmetrize=False)

    def reciprocal(self):
        v = self.val
        inv = 1.0 / v
        return self.apply(inv, -inv * inv, 2.0 * inv * inv * inv)

    def sin(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self.apply(s, c, -s)

    def cos(self):
        s, c = np.sin(self.val), np.cos(self.val)
        return self.apply(c, -s, -c)

    def exp(self):
        e = np.exp(self.val)
        return self.apply(e, e, e)

    def log(self):
        inv = 1.0 / self.val
        return self.apply(np.log(self.val), inv, -inv * inv)

    def sqrt(self):
        s = np.sqrt(self.val)
        return self.apply(s, 0.5 / s, -0.25 / (s * self.val))


def constant_jet(val, dim, order=2):
    """Jet with zero derivatives; ``val`` already carries the batch axis."""
    val = np.asarray(val, dtype=float)
    grad = np.zeros(val.shape + (dim,)) if order >= 1 else None
    hess = np.zeros(val.shape + (dim, dim)) if order >= 2 else None
    return Jet(val, grad, hess, dim=dim, symmetrize=False)


def coords_jet(points, order=2):
    """Seed jet of the chart coordinates themselves: value x, gradient I, Hessian 0."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    grad = np.broadcast_to(np.eye(d), (n, d, d)).copy() if order >= 1 else None
    hess = np.zeros((n, d, d, d)) if order >= 2 else None
    return Jet(pts.copy(), grad, hess, dim=d, symmetrize=False)


def stack_jets(jets, axis=0):
    """Stack same-shaped jets along a new tensor axis (0-based over the tensor axes)."""
    jets = list(jets)
    order = min(j.order for j in jets)
    ax = axis + 1
    val = np.stack([j.val for j in jets], axis=ax)
    grad = np.stack([j.grad for j in jets], axis=ax) if order >= 1 else None
    hess = np.stack([j.hess for j in jets], axis=ax) if order >= 2 else None
    return Jet(val, grad, hess, dim=jets[0].dim, symmetrize=False)


# -- contractions -------------------------------------------------------------

def _parse(subscripts, nops):
    if "->" not in subscripts:
        raise ValueError("jet_einsum needs an explicit '->' output")
    lhs, out = subscripts.replace(" ", "").split("->")
    ins = lhs.split(",")
    if len(ins) != nops:
        raise ValueError(f"{len(ins)} input specs for {nops} operands")
    for s in ins + [out]:
        if not s.islower() and s:
            raise ValueError("jet_einsum subscripts must be lowercase letters")
    return ins, out


@lru_cache(maxsize=4096)
def _plan(subscripts, shape_a, shape_b):
    """Reduce a two-operand contraction to one batched matmul, or None when einsum must handle it."""
    lhs, out = subscripts.split("->")
    sa, sb = lhs.split(",")
    if len(set(sa)) != len(sa) or len(set(sb)) != len(sb) or len(set(out)) != len(out):
        return None
    size = dict(zip(sa, shape_a))
    size.update(zip(sb, shape_b))
    only_a = [c for c in sa if c not in sb and c not in out]
    only_b = [c for c in sb if c not in sa and c not in out]
    ka = [c for c in sa if c not in only_a]
    kb = [c for c in sb if c not in only_b]
    batch = [c for c in ka if c in kb and c in out]
    contr = [c for c in ka if c in kb and c not in out]
    free_a = [c for c in ka if c not in kb]
    free_b = [c for c in kb if c not in ka]
    perm_a = tuple(ka.index(c) for c in batch + free_a + contr)
    perm_b = tuple(kb.index(c) for c in batch + contr + free_b)
    prod = lambda cs: int(np.prod([size[c] for c in cs], dtype=np.int64))
    shape3_a = (prod(batch), prod(free_a), prod(contr))
    shape3_b = (prod(batch), prod(contr), prod(free_b))
    mid = batch + free_a + free_b
    full = tuple(size[c] for c in mid)
    perm_out = tuple(mid.index(c) for c in out)
    sum_a = tuple(sa.index(c) for c in only_a)
    sum_b = tuple(sb.index(c) for c in only_b)
    return sum_a, sum_b, perm_a, perm_b, shape3_a, shape3_b, full, perm_out


def _einsum(subscripts, *arrs):
    """einsum for the jet product rule; two-operand contractions go through batched matmul."""
    if len(arrs) == 2:
        a, b = arrs
        plan = _plan(subscripts, a.shape, b.shape)
        if plan is not None:
            sum_a, sum_b, perm_a, perm_b, s3a, s3b, full, perm_out = plan
            if sum_a:
                a = a.sum(axis=sum_a)
            if sum_b:
                b = b.sum(axis=sum_b)
            m = np.matmul(a.transpose(perm_a).reshape(s3a), b.transpose(perm_b).reshape(s3b))
            return m.reshape(full).transpose(perm_out)
    return np.einsum(subscripts, *arrs, optimize=True)


def _pair(sa, sb, so, a, b, dim):
    """Product rule for one contraction between two operands (Jet or constant ndarray)."""
    ja, jb = isinstance(a, Jet), isinstance(b, Jet)
    if ja and jb:
        order = min(a.order, b.order)
        val = _einsum(f"Z{sa},Z{sb}->Z{so}", a.val, b.val)
        grad = hess = None
        if order >= 1:
            grad = (_einsum(f"Z{sa}Y,Z{sb}->Z{so}Y", a.grad, b.val)
                    + _einsum(f"Z{sa},Z{sb}Y->Z{so}Y", a.val, b.grad))
        if order >= 2:
            cross = _einsum(f"Z{sa}Y,Z{sb}X->Z{so}YX", a.grad, b.grad)
            hess = (_einsum(f"Z{sa}YX,Z{sb}->Z{so}YX", a.hess, b.val)
                    + _einsum(f"Z{sa},Z{sb}YX->Z{so}YX", a.val, b.hess)
                    + cross + np.swapaxes(cross, -1, -2))
        return Jet(val, grad, hess, dim=dim, symmetrize=False)
    if ja and not jb:
        return _pair(sb, sa, so, b, a, dim)
    if not ja and jb:
        c = np.asarray(a, dtype=float)
        return b.map_linear(
            lambda arr, extra: _einsum(
                f"{sa},Z{sb}{'YX'[:extra]}->Z{so}{'YX'[:extra]}", c, arr))
    raise TypeError("jet_einsum needs at least one Jet operand")


def jet_einsum(subscripts, *operands):
    """Einstein summation over tensor axes of jets, with derivatives by the product rule.

    Operands are :class:`Jet` objects (batched) or plain arrays (constants shared
    by every point, no batch axis).  Subscripts use lowercase letters only and
    never mention the batch or derivative axes.
    """
    ins, out = _parse(subscripts, len(operands))
    jets = [o for o in operands if isinstance(o, Jet)]
    if not jets:
        raise TypeError("jet_einsum needs at least one Jet operand")
    dim = jets[0].dim
    if len(operands) == 1:
        (a,) = operands
        return a.map_linear(
            lambda arr, extra: _einsum(f"Z{ins[0]}{'YX'[:extra]}->Z{out}{'YX'[:extra]}", arr))
    acc, sacc = operands[0], ins[0]
    for k in range(1, len(operands)):
        later = set("".join(ins[k + 1:])) | set(out)
        here = sacc + ins[k]
        if k == len(operands) - 1:
            sout = out
        else:
            sout = "".join(dict.fromkeys(c for c in here if c in later))
        acc = _pair(sacc, ins[k], sout, acc, operands[k], dim)
        sacc = sout
    return acc


def jet_inv(a):
    """Inverse of a batched (d, d) matrix jet: d(A^-1) = -A^-1 dA A^-1, and its second variation."""
    if len(a.shape) != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"jet_inv needs square matrices, got {a.shape}")
    val, grad, hess = _kernels.inv_jet(a.val, a.grad, a.hess)
    return Jet(val, grad, hess, dim=a.dim, symmetrize=False)


# -- finite-difference jets -----------------------------------------------------

# fourth-order central weights for the first derivative: offsets -2, -1, 1, 2
_D1 = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))
# fourth-order central weights for the second derivative: offsets -2..2
_D2 = ((-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0))


def fd_jet(fn, points, step=1e-4, order=2):
    """Jet whose derivatives come from fourth-order central differences of ``fn``.

    ``fn`` maps an (M, d) array of points to an (M, *S) array of values.  The
    step at each point is ``step * max(1, r)``.  Mixed second derivatives use
    the tensor product of the first-derivative stencil; the Hessian is filled
    symmetrically from its upper triangle.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    h = step * np.maximum(1.0, np.linalg.norm(pts, axis=1))

    shifts = [np.zeros(d)]
    index = {(): 0}

    def want(offsets):
        key = tuple(sorted(offsets))
        if key not in index:
            vec = np.zeros(d)
            for ax, m in key:
                vec[ax] += m
            index[key] = len(shifts)
            shifts.append(vec)
        return index[key]

    if order >= 1:
        for i in range(d):
            for m, _ in _D1:
                want(((i, m),))
    if order >= 2:
        for i in range(d):
            for j in range(i + 1, d):
                for mi, _ in _D1:
                    for mj, _ in _D1:
                        want(((i, mi), (j, mj)))

    shifts = np.array(shifts)
    stencil = pts[None, :, :] + shifts[:, None, :] * h[None, :, None]
    vals = np.asarray(fn(stencil.reshape(-1, d)), dtype=float)
    vals = vals.reshape((len(shifts), n) + vals.shape[1:])
    f0 = vals[0]
    bshape = (n,) + (1,) * (f0.ndim - 1)
    hb = h.reshape(bshape)

    grad = hess = None
    if order >= 1:
        grad = np.zeros(f0.shape + (d,))
        for i in range(d):
            acc = np.zeros_like(f0)
            for m, w in _D1:
                acc = acc + w * vals[index[((i, m),)]]
            grad[..., i] = acc / hb
    if order >= 2:
        hess = np.zeros(f0.shape + (d, d))
        for i in range(d):
            acc = np.zeros_like(f0)
            for m, w in _D2:
                acc = acc + w * (f0 if m == 0 else vals[index[((i, m),)]])
            hess[..., i, i] = acc / (hb * hb)
            for j in range(i + 1, d):
                acc = np.zeros_like(f0)
                for mi, wi in _D1:
                    for mj, wj in _D1:
                        acc = acc + (wi * wj) * vals[index[((i, mi), (j, mj))]]
                hess[..., i, j] = acc / (hb * hb)
                hess[..., j, i] = hess[..., i, j]
    return Jet(f0, grad, hess, dim=d, symmetrize=False)
