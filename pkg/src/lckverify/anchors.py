"""Convention anchors: closed-form values that pin down every sign and normalization."""

from __future__ import annotations

import math

import numpy as np

from . import connection as conn
from . import tensors as tn
from .forms import Form, exterior_d, interior, wedge
from .jets import coords_jet, constant_jet
from .lck import Geometry
from .models import build_model, hopf_structure, flat_kahler

__all__ = ["P0", "run_anchors"]

P0 = np.array([[1.0, 0.0, 0.0, 0.0]])


def _dx(k, pts):
    d = pts.shape[1]
    v = np.zeros((len(pts), d))
    v[:, k] = 1.0
    return Form(1, constant_jet(v, d, 0))


def _wedge_normalization():
    e = wedge(_dx(0, P0), _dx(1, P0)).full().val[0]
    return abs(e[0, 1] - 1.0) + abs(e[1, 0] + 1.0)


def _laplacian_sign():
    s = flat_kahler(2)
    geo = Geometry(s, np.array([[0.3, -0.7, 1.1, 0.4]]))
    h = coords_jet(geo.points)[0] * coords_jet(geo.points)[0]
    return abs(conn.laplacian(h, geo.ginv, geo.gamma).val[0] + 2.0)


def _j_on_forms():
    s = flat_kahler(2)
    J = s.J.jet_eval(P0, order=0)
    Jdx = tn.j_on_oneform(J, _dx(0, P0)).packed.val[0]
    return float(np.abs(Jdx - np.array([0.0, 1.0, 0.0, 0.0])).max())


def _lee_dual():
    geo = Geometry(hopf_structure(2), P0)
    a = np.abs(geo.Jtheta.packed.val[0] - np.array([0.0, -2.0, 0.0, 0.0])).max()
    b = np.abs(interior(geo.T, geo.omega).packed.val[0] - geo.Jtheta.packed.val[0]).max()
    c = np.abs(geo.T.val[0] - np.array([-0.5, 0.0, 0.0, 0.0])).max()
    return float(max(a, b, c))


def _christoffel():
    geo = Geometry(hopf_structure(2), P0)
    G = geo.gamma.val[0]
    return float(max(abs(G[0, 0, 0] + 1.0), abs(G[0, 1, 1] - 1.0), abs(G[1, 0, 1] + 1.0)))


def _traces():
    geo = Geometry(hopf_structure(2), P0)
    out = 0.0
    for eta, want in ((geo.omega, 4.0), (wedge(geo.theta, geo.Jtheta), 2.0), (geo.dJtheta, -2.0)):
        tr = tn.trace_omega(eta.full().val, geo.J.val, geo.ginv_val)[1][0]
        out = max(out, abs(tr - want))
    return out


def _hopf_log_r():
    pts = np.array([[1.3, -0.4, 0.7, 2.1]])
    geo = Geometry(hopf_structure(2), pts)
    h = geo.extra("log_r")
    lap = conn.laplacian(h, geo.ginv, geo.gamma).val[0]
    dJd = exterior_d(tn.j_on_oneform(geo.J, exterior_d(h))).full().val
    tr = tn.trace_omega(dJd, geo.J.val, geo.ginv_val)[1][0]
    return float(max(abs(lap), abs(tr - 1.0)))


def _norm_T_spot():
    s = build_model({"model": "hopf-deformed"})
    r = math.exp(2.0 * math.pi) ** 0.25
    pts = np.array([[r, 0.0, 0.0, 0.0]])
    geo = Geometry(s, pts, order=0)
    gTT = float(np.einsum("ij,i,j->", geo.g_val[0], geo.T.val[0], geo.T.val[0]))
    return abs(gTT - 1.5)


def _ad_vs_fd():
    s = build_model({"model": "hopf-deformed"})
    pts = np.array([[1.3, -0.4, 0.7, 2.1], [-3.0, 1.2, 0.5, -0.8]])
    ad = s.g.jet_eval(pts, engine="ad")
    fd = s.g.jet_eval(pts, engine="fd")
    return float(max(np.abs(ad.grad - fd.grad).max(), np.abs(ad.hess - fd.hess).max()))


ANCHORS = (
    ("wedge normalization: (dx1 ^ dy1)(d_x1, d_y1) = 1", _wedge_normalization, 1e-15),
    ("Laplacian sign: Delta x1^2 = -2 on flat space", _laplacian_sign, 1e-12),
    ("J on 1-forms: J dx1 = dy1", _j_on_forms, 0.0),
    ("Lee duals at (1,0,0,0): T = -d_x1 / 2, J theta = T _| omega = -2 dy1", _lee_dual, 1e-14),
    ("Christoffel symbols at (1,0,0,0): -1, +1, -1", _christoffel, 1e-13),
    ("omega-traces on Hopf: 2n, 2, -2", _traces, 1e-12),
    ("Hopf: Delta ln r = 0 and Tr_omega(dJd ln r) = 1", _hopf_log_r, 1e-9),
    ("deformed Hopf: g(T, T) = 3/2 at r = a^(1/4)", _norm_T_spot, 1e-12),
    ("AD vs finite differences on the deformed metric", _ad_vs_fd, 1e-5),
)


def run_anchors():
    """List of (name, deviation, tolerance, passed)."""
    out = []
    for name, fn, tol in ANCHORS:
        dev = float(fn())
        out.append((name, dev, tol, bool(dev <= tol)))
    return out
