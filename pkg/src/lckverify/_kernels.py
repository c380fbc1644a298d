"""Hot numeric kernels, each with a numba and a numpy implementation.

The public names (``inv_jet``, ``weighted_sum``, ...) dispatch on
``_accel.USE_JIT``.  Both implementations stay importable as ``*_nb`` and
``*_np`` so tests and the benchmark can compare them directly.
"""

import numpy as np

from ._accel import USE_JIT, njit
from .errors import DegeneracyError

_EMPTY3 = np.zeros((0, 0, 0))
_EMPTY4 = np.zeros((0, 0, 0, 0))
_EMPTY5 = np.zeros((0, 0, 0, 0, 0))


# -- matrix inverse with first and second variations ---------------------------

def inv_jet_np(val, grad=None, hess=None):
    try:
        b = np.linalg.inv(val)
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("singular matrix in jet inverse") from exc
    if not np.all(np.isfinite(b)):
        raise DegeneracyError("non-finite matrix inverse")
    g = h = None
    if grad is not None:
        # derivative axes first so each slice is a plain matrix product
        B = b[:, None]
        m = B @ np.moveaxis(grad, -1, 1)                       # B dA_p
        g = np.moveaxis(-(m @ B), 1, -1)
        if hess is not None:
            H = np.moveaxis(hess, (-2, -1), (1, 2))
            B2 = b[:, None, None]
            t = m[:, :, None] @ m[:, None, :] @ B2          # B dA_p B dA_q B
            out = t + np.swapaxes(t, 1, 2) - B2 @ H @ B2
            h = np.moveaxis(out, (1, 2), (-2, -1))
    return b, g, h


@njit
def _inv_jet_nb(val, grad, hess, order):
    n, d, _ = val.shape
    b = np.empty((n, d, d))
    n1 = n if order >= 1 else 0
    n2 = n if order >= 2 else 0
    g = np.zeros((n1, d, d, d))
    h = np.zeros((n2, d, d, d, d))
    m = np.empty((d, d, d))
    hb = np.empty((d, d))
    for z in range(n):
        bz = np.linalg.inv(val[z])
        b[z] = bz
        if order < 1:
            continue
        # m[:, :, p] = B dA_p
        for p in range(d):
            for i in range(d):
                for j in range(d):
                    s = 0.0
                    for k in range(d):
                        s += bz[i, k] * grad[z, k, j, p]
                    m[i, j, p] = s
        for p in range(d):
            for i in range(d):
                for k in range(d):
                    s = 0.0
                    for j in range(d):
                        s += m[i, j, p] * bz[j, k]
                    g[z, i, k, p] = -s
        if order < 2:
            continue
        for p in range(d):
            for q in range(p, d):
                # hb = ddA_pq B
                for k in range(d):
                    for l in range(d):
                        u = 0.0
                        for j in range(d):
                            u += hess[z, k, j, p, q] * bz[j, l]
                        hb[k, l] = u
                for i in range(d):
                    for l in range(d):
                        # B dA_p B dA_q B + B dA_q B dA_p B - B ddA_pq B
                        s = 0.0
                        for j in range(d):
                            s -= m[i, j, p] * g[z, j, l, q] + m[i, j, q] * g[z, j, l, p]
                        t = 0.0
                        for k in range(d):
                            t += bz[i, k] * hb[k, l]
                        h[z, i, l, p, q] = s - t
                        h[z, i, l, q, p] = s - t
    return b, g, h


def inv_jet_nb(val, grad=None, hess=None):
    order = 0 if grad is None else (1 if hess is None else 2)
    val = np.ascontiguousarray(val, dtype=np.float64)
    g_in = _EMPTY4 if grad is None else np.ascontiguousarray(grad, dtype=np.float64)
    h_in = _EMPTY5 if hess is None else np.ascontiguousarray(hess, dtype=np.float64)
    if val.ndim != 3:
        raise ValueError("inv_jet expects (N, d, d) matrices")
    try:
        b, g, h = _inv_jet_nb(val, g_in, h_in, order)
    except np.linalg.LinAlgError as exc:  # numba raises the numpy error type
        raise DegeneracyError("singular matrix in jet inverse") from exc
    if not np.all(np.isfinite(b)):
        raise DegeneracyError("non-finite matrix inverse")
    return b, (g if order >= 1 else None), (h if order >= 2 else None)


# -- deterministic weighted reduction ---------------------------------------------

_BLOCK = 64


def weighted_sum_np(values, weights):
    """Pairwise (tree) sum of values*weights with fixed block structure."""
    prod = np.ascontiguousarray(np.asarray(values, dtype=float) * np.asarray(weights, dtype=float))
    n = prod.size
    if n == 0:
        return 0.0
    nb = -(-n // _BLOCK)
    padded = np.zeros(nb * _BLOCK)
    padded[:n] = prod.ravel()
    # sequential sum inside each block, then a balanced tree over blocks
    partial = np.zeros(nb)
    blocks = padded.reshape(nb, _BLOCK)
    for k in range(_BLOCK):
        partial = partial + blocks[:, k]
    while partial.size > 1:
        if partial.size % 2:
            partial = np.append(partial, 0.0)
        partial = partial[0::2] + partial[1::2]
    return float(partial[0])


@njit
def _weighted_sum_nb(values, weights):
    n = values.size
    if n == 0:
        return 0.0
    nb = (n + _BLOCK - 1) // _BLOCK
    partial = np.zeros(nb)
    for b in range(nb):
        s = 0.0
        for k in range(_BLOCK):
            i = b * _BLOCK + k
            if i < n:
                s += values[i] * weights[i]
            else:
                s += 0.0
        partial[b] = s
    m = nb
    while m > 1:
        half = (m + 1) // 2
        nxt = np.zeros(half)
        for i in range(half):
            a = partial[2 * i]
            c = partial[2 * i + 1] if 2 * i + 1 < m else 0.0
            nxt[i] = a + c
        partial = nxt
        m = half
    return partial[0]


def weighted_sum_nb(values, weights):
    v = np.ascontiguousarray(np.asarray(values, dtype=np.float64).ravel())
    w = np.ascontiguousarray(np.asarray(weights, dtype=np.float64).ravel())
    return float(_weighted_sum_nb(v, w))


if USE_JIT:
    inv_jet = inv_jet_nb
    weighted_sum = weighted_sum_nb
else:
    inv_jet = inv_jet_np
    weighted_sum = weighted_sum_np
