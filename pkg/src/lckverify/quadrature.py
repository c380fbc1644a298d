"""Quadrature over the Hopf fundamental domain 1 <= r <= a in R^4.

Nodes are placed in t = ln r and Hopf-style angles on S^3,

    x1 + i y1 = r cos(eta) e^{i xi1},   x2 + i y2 = r sin(eta) e^{i xi2},

with Euclidean volume element r^4 sin(eta) cos(eta) dt deta dxi1 dxi2.  The t
direction uses the periodic trapezoid rule (the model integrands are
a-periodic in ln r), eta uses Gauss-Legendre on [0, pi/2] and both xi use the
uniform periodic rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import connection as conn
from ._kernels import weighted_sum
from .errors import ConfigError
from .lck import CheckVerdict, Geometry
from .models import ModelDescriptor, build_model

__all__ = [
    "QuadratureGrid",
    "Quantity",
    "QUANTITIES",
    "integrate",
    "integrate_many",
    "volume_closed_form",
    "check_integral_identities",
    "CHECK_QUANTITY",
    "convergence_table",
    "halves_under_doubling",
    "observed_orders",
]

RADIAL_RULES = ("trapezoid", "gauss")


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product grid with ``n_r`` radial and ``n_ang**3`` angular nodes.

    ``radial='gauss'`` switches t to Gauss-Legendre, which is the right rule
    for integrands that are not periodic in ln r (e.g. the Euclidean volume).
    """

    n_r: int = 64
    n_ang: int = 16
    a: float = math.exp(2.0 * math.pi)
    radial: str = "trapezoid"

    def __post_init__(self):
        if self.n_r < 1 or self.n_ang < 1:
            raise ConfigError("grid sizes must be positive")
        if not self.a > 1.0:
            raise ConfigError("dilation factor a must exceed 1")
        if self.radial not in RADIAL_RULES:
            raise ConfigError(f"radial rule must be one of {RADIAL_RULES}")

    @property
    def size(self):
        return self.n_r * self.n_ang ** 3

    def radial_nodes(self):
        L = math.log(self.a)
        if self.radial == "trapezoid":
            t = np.arange(self.n_r) * (L / self.n_r)
            w = np.full(self.n_r, L / self.n_r)
        else:
            u, w = np.polynomial.legendre.leggauss(self.n_r)
            t = 0.5 * L * (u + 1.0)
            w = 0.5 * L * w
        return t, w

    def angular_nodes(self):
        """(eta, xi1, xi2) nodes and the weights of sin(eta) cos(eta) deta dxi1 dxi2; they sum to 2 pi^2."""
        u, w = np.polynomial.legendre.leggauss(self.n_ang)
        eta = 0.25 * math.pi * (u + 1.0)
        w_eta = 0.25 * math.pi * w * np.sin(eta) * np.cos(eta)
        # half-step offset keeps nodes off the coordinate axes
        xi = (np.arange(self.n_ang) + 0.5) * (2.0 * math.pi / self.n_ang)
        w_xi = np.full(self.n_ang, 2.0 * math.pi / self.n_ang)
        E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
        W = w_eta[:, None, None] * w_xi[None, :, None] * w_xi[None, None, :]
        return E.ravel(), X1.ravel(), X2.ravel(), W.ravel()

    def nodes(self):
        """Chart points (M, 4) and Euclidean weights (M,), ordered radial-major."""
        t, wt = self.radial_nodes()
        eta, xi1, xi2, wa = self.angular_nodes()
        r = np.exp(t)
        ce, se = np.cos(eta), np.sin(eta)
        unit = np.stack([ce * np.cos(xi1), ce * np.sin(xi1), se * np.cos(xi2), se * np.sin(xi2)], axis=1)
        pts = (r[:, None, None] * unit[None, :, :]).reshape(-1, 4)
        w = ((wt * r ** 4)[:, None] * wa[None, :]).reshape(-1)
        return pts, w


@dataclass(frozen=True)
class Quantity:
    """A scalar integrand: the jet order it needs and its per-point values on a Geometry."""

    name: str
    order: int
    fn: Callable


def _nabla_theta_sq(geo):
    S = geo.S.val
    return np.einsum("zij,zkl,zik,zjl->z", S, S, geo.ginv_val, geo.ginv_val)


def _lee_ibp(geo):
    T_tsq = conn.lie_derivative_function(geo.T, geo.theta_sq).val
    return T_tsq - geo.theta_sq.val * geo.delta_theta.val


QUANTITIES = {
    "volume": Quantity("volume", 0, lambda geo: np.ones(geo.npoints)),
    "lee-sq": Quantity("lee-sq", 0, lambda geo: geo.theta_sq.val),
    "div-lee": Quantity("div-lee", 1, lambda geo: geo.delta_theta.val),
    "lee-ibp": Quantity("lee-ibp", 1, _lee_ibp),
    "nabla-lee-sq": Quantity("nabla-lee-sq", 1, _nabla_theta_sq),
    "laplacian-lee-sq": Quantity("laplacian-lee-sq", 2,
                                 lambda geo: conn.laplacian(geo.theta_sq, geo.ginv, geo.gamma).val),
}


def _structure(model):
    if isinstance(model, (ModelDescriptor, dict)):
        model = build_model(model)
    if model.n != 2:
        raise ConfigError(f"quadrature is supported only for n = 2 (got n = {model.n})")
    if model.params.get("model") not in ("hopf", "hopf-deformed"):
        raise ConfigError("quadrature is defined only on the Hopf fundamental domain")
    return model


def _resolve(q):
    if isinstance(q, Quantity):
        return q
    try:
        return QUANTITIES[q]
    except KeyError:
        raise ConfigError(f"unknown quantity {q!r}; expected one of {sorted(QUANTITIES)}") from None


def integrate_many(model, quantities, grid, engine="ad", chunk=8192):
    """Integrals of several quantities against vol_g of the model, sharing one pass over the nodes."""
    s = _structure(model)
    qs = [_resolve(q) for q in quantities]
    a = float(s.params["a"])
    if not math.isclose(grid.a, a, rel_tol=1e-14):
        grid = QuadratureGrid(grid.n_r, grid.n_ang, a, grid.radial)
    pts, w = grid.nodes()
    order = max(q.order for q in qs)
    vals = {q.name: np.empty(len(pts)) for q in qs}
    dens = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        hi = min(lo + chunk, len(pts))
        geo = Geometry(s, pts[lo:hi], engine=engine, order=order)
        dens[lo:hi] = np.sqrt(np.linalg.det(geo.g_val))
        for q in qs:
            vals[q.name][lo:hi] = q.fn(geo)
    wg = w * dens
    return {q.name: weighted_sum(vals[q.name], wg) for q in qs}


def integrate(model, h, grid, engine="ad", chunk=8192):
    """Integral of the scalar quantity ``h`` (name or :class:`Quantity`) over the fundamental domain."""
    q = _resolve(h)
    return integrate_many(model, [q], grid, engine=engine, chunk=chunk)[q.name]


def volume_closed_form(a):
    """Volume of the fundamental domain of the n = 2 Hopf metric: 16 * 2 pi^2 * ln a.

    The deformed metric has the same volume: its density carries a factor
    (1 + f), and f integrates to zero over a period of ln r.
    """
    return 32.0 * math.pi ** 2 * math.log(a)


def _verdict(name, value, tol, note=""):
    res = abs(float(value))
    return CheckVerdict(name, res, res, float(tol), bool(res <= tol), (), note)


CHECK_QUANTITY = {
    "int_volume": "volume",
    "int_div_lee": "div-lee",
    "int_laplacian_lee_sq": "laplacian-lee-sq",
    "int_lee_ibp": "lee-ibp",
    "int_nabla_lee_sq": "nabla-lee-sq",
}


def check_integral_identities(model, grid=None, engine="ad", rel_tol=1e-3, quantities=None):
    """Global integral identities on the fundamental domain.

    Volume against the closed form, Stokes for delta theta and for the
    Laplacian of |theta|^2, the integration-by-parts step for |theta|^2, and
    (on Vaisman models) the vanishing of the integral of |nabla theta|^2.
    ``quantities`` restricts the checks to those integrating the named quantities.
    """
    s = _structure(model)
    a = float(s.params["a"])
    grid = QuadratureGrid(a=a) if grid is None else grid
    wanted = set(QUANTITIES if quantities is None else quantities)
    unknown = wanted - set(QUANTITIES)
    if unknown:
        raise ConfigError(f"unknown quantities {sorted(unknown)}")
    ids = [c for c, q in CHECK_QUANTITY.items() if q in wanted]
    if "int_nabla_lee_sq" in ids and not s.params.get("vaisman_model"):
        ids.remove("int_nabla_lee_sq")
    names = ["volume"] + [CHECK_QUANTITY[c] for c in ids if c != "int_volume"]
    vals = integrate_many(s, names, grid, engine=engine)
    vol = vals["volume"]
    exact = volume_closed_form(a)
    out = []
    for cid in ids:
        v = vals[CHECK_QUANTITY[cid]]
        note = f"integral = {v!r}"
        if cid == "int_volume":
            out.append(_verdict(cid, (v - exact) / exact, 1e-6, note + f", closed form {exact!r}"))
        elif cid == "int_nabla_lee_sq":
            out.append(_verdict(cid, v, 1e-8, note))
        else:
            out.append(_verdict(cid, v, rel_tol * vol, note))
    return out


def convergence_table(model, quantity, sizes, exact=0.0, engine="ad", radial="trapezoid"):
    """Rows (n_r, n_ang, value, |value - exact|) for a sequence of grid sizes."""
    s = _structure(model)
    a = float(s.params["a"])
    rows = []
    for n_r, n_ang in sizes:
        v = integrate(s, quantity, QuadratureGrid(n_r, n_ang, a, radial), engine=engine)
        rows.append((n_r, n_ang, v, abs(v - exact)))
    return rows


def halves_under_doubling(errors, floor):
    """Each refinement at least halves the error, unless it is already at the roundoff floor."""
    return all(e1 <= max(0.5 * e0, floor) for e0, e1 in zip(errors, errors[1:]))


def observed_orders(errors, floor):
    """log2 error ratios between successive doublings; ``inf`` once the floor is reached."""
    out = []
    for e0, e1 in zip(errors, errors[1:]):
        if e1 <= floor:
            out.append(math.inf)
        else:
            out.append(math.log2(e0 / e1) if e0 > 0 else 0.0)
    return out
