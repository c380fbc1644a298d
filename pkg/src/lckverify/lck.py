"""lcK structures, their evaluated geometry at sample points, and the predicate checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import connection as conn
from . import tensors as tn
from .errors import DegeneracyError, StructureError
from .fields import Field, chart_points
from .forms import Form, exterior_d, interior, wedge

__all__ = [
    "LckStructure",
    "CheckVerdict",
    "Geometry",
    "Tolerances",
    "make_verdict",
    "fundamental_form",
    "lee_form",
    "validate_structure",
    "check_lck",
    "check_vaisman",
    "check_gauduchon",
    "check_potential",
    "check_holomorphic",
    "check_killing",
]


class Tolerances:
    STRUCTURAL = 1e-11
    FIRST_ORDER = 1e-9
    SECOND_ORDER = 1e-7
    # multiplier applied under the finite-difference engine
    FD_FACTOR = 100.0

    @classmethod
    def scaled(cls, tol, engine):
        return tol * cls.FD_FACTOR if engine == "fd" else tol


@dataclass(frozen=True)
class LckStructure:
    """Bundle (g, J, omega, theta) on a chart, plus model bookkeeping.

    ``extras`` holds named auxiliary fields a model exposes (e.g. ``log_r``,
    the deformation profile ``f``, or the undeformed Lee form).
    """

    name: str
    n: int
    g: Field
    J: Field
    omega: Field
    theta: Field
    extras: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    @property
    def dim(self):
        return 2 * self.n


@dataclass(frozen=True)
class CheckVerdict:
    name: str
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool
    witness: tuple
    note: str = ""

    def as_dict(self, anchor=""):
        out = {"id": self.name}
        if anchor:
            out["paper_anchor"] = anchor
        out.update({
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "witness": list(self.witness),
        })
        if self.note:
            out["note"] = self.note
        return out


def make_verdict(name, residuals, tol, points, note="", force_fail=False):
    """Aggregate per-point residuals; the witness is the first point attaining the max."""
    res = np.asarray(residuals, dtype=float).reshape(-1)
    if res.size == 0:
        raise ValueError("no residuals to aggregate")
    if not np.all(np.isfinite(res)):
        k = int(np.argmax(~np.isfinite(res)))
        return CheckVerdict(name, float("inf"), float("inf"), float(tol), False,
                            tuple(float(c) for c in points[k]), note or "non-finite residual")
    k = int(np.argmax(res))
    mx = float(res[k])
    return CheckVerdict(name, mx, float(np.mean(res)), float(tol),
                        bool(mx <= tol) and not force_fail,
                        tuple(float(c) for c in points[k]), note)


# -- jet-level constructions -------------------------------------------------------

def fundamental_form(g, J):
    """omega(X, Y) = g(JX, Y) from evaluated jets of g and J."""
    return tn.fundamental_form(g, J)


def lee_form(g, J, n, ginv=None):
    """Recover theta from (g, J) by contracting d omega with omega.

    The result has one jet order less than ``g``.
    """
    if ginv is None:
        ginv = tn.metric_inverse(g)
    return tn.lee_contraction(exterior_d(fundamental_form(g, J)), J, ginv, n)


class Geometry:
    """Every derived tensor of an lcK structure, evaluated once at a batch of points.

    Primitive fields are evaluated with the chosen engine (``'ad'`` or ``'fd'``);
    all derived objects follow by jet arithmetic.  Instances are per-worker
    caches and are never shared.
    """

    def __init__(self, structure, points, engine="ad", order=2, fd_step=1e-4):
        self.s = structure
        self.points = chart_points(points, structure.dim)
        self.engine = engine
        self.order = order
        self.fd_step = fd_step

    @property
    def n(self):
        return self.s.n

    @property
    def npoints(self):
        return self.points.shape[0]

    def eval_field(self, f, order=None):
        return f.jet_eval(self.points, order=self.order if order is None else order,
                          engine=self.engine, fd_step=self.fd_step)

    def extra(self, key, order=None):
        return self.eval_field(self.s.extras[key], order)

    # primitives
    @cached_property
    def g(self):
        return self.eval_field(self.s.g)

    @cached_property
    def J(self):
        return self.eval_field(self.s.J)

    @cached_property
    def omega(self):
        return self.eval_field(self.s.omega)

    @cached_property
    def theta(self):
        return self.eval_field(self.s.theta)

    # algebra
    @cached_property
    def ginv(self):
        return tn.metric_inverse(self.g)

    @property
    def g_val(self):
        return self.g.val

    @property
    def ginv_val(self):
        return self.ginv.val

    @cached_property
    def T(self):
        return tn.sharp(self.ginv, self.theta)

    @cached_property
    def Jtheta(self):
        return tn.j_on_oneform(self.J, self.theta)

    @cached_property
    def JT(self):
        return tn.apply_endo(self.J, self.T)

    @cached_property
    def theta_sq(self):
        return interior(self.T, self.theta)

    @cached_property
    def frame(self):
        return tn.orthonormal_frame(self.g_val)

    # connection
    @cached_property
    def gamma(self):
        return conn.christoffel(self.g, self.ginv)

    @cached_property
    def sff(self):
        return conn.second_fundamental(self.theta, self.ginv, self.gamma)

    @property
    def S(self):
        return self.sff.S

    @property
    def F(self):
        return self.sff.F

    @cached_property
    def nabla_J(self):
        return conn.cov_deriv_endo(self.J, self.gamma)

    @cached_property
    def dtheta(self):
        return exterior_d(self.theta)

    @cached_property
    def domega(self):
        return exterior_d(self.omega)

    @cached_property
    def dJtheta(self):
        return exterior_d(self.Jtheta)

    @cached_property
    def delta_theta(self):
        return conn.codifferential(self.theta, self.ginv, self.gamma)

    @cached_property
    def d_theta_sq(self):
        return exterior_d(self.theta_sq)

    # norms
    def norm(self, tensor, variance, form_degree=0):
        t = tensor.val if hasattr(tensor, "val") else tensor
        return tn.g_norm(t, variance, self.g_val, self.ginv_val, form_degree)

    def form_norm(self, form):
        return self.norm(form.full(), "l" * form.degree, form.degree)


def validate_structure(s, points, tol=1e-8):
    """Structural sanity: g symmetric positive-definite, J^2 = -1, g(J., J.) = g, omega = g(J., .).

    Raises :class:`StructureError` or :class:`DegeneracyError`; returns the max
    deviations otherwise.
    """
    pts = chart_points(points, s.dim)
    g = s.g.value(pts)
    J = s.J.value(pts)
    scale = np.max(np.abs(g), axis=(1, 2))
    asym = float(np.max(np.abs(g - np.swapaxes(g, 1, 2)).max(axis=(1, 2)) / scale))
    if asym > tol:
        raise StructureError(f"metric is not symmetric (relative {asym:.3e})")
    eig = np.linalg.eigvalsh(g)
    if np.any(eig[:, 0] <= 0.0):
        raise DegeneracyError("metric is not positive-definite at some sample")
    d = s.dim
    jsq = float(np.max(np.abs(np.einsum("zij,zjk->zik", J, J) + np.eye(d))))
    if jsq > tol:
        raise StructureError(f"J^2 != -1 (max deviation {jsq:.3e})")
    compat = tn.check_compatible(g, J, tol)
    omega = s.omega.jet_eval(pts, order=0).full().val
    gJ = np.einsum("zki,zkj->zij", J, g)
    om = float(np.max(np.abs(omega - gJ).max(axis=(1, 2)) / scale))
    if om > tol:
        raise StructureError(f"omega != g(J., .) (relative {om:.3e})")
    return {"asymmetry": asym, "J_squared": jsq, "compatibility": compat, "omega": om,
            "min_eigenvalue": float(eig[:, 0].min())}


# -- checkers --------------------------------------------------------------------------

def _geom(s, samples, engine):
    if isinstance(samples, Geometry):
        return samples
    return Geometry(s, samples, engine=engine)


def _tol(tol, default, engine):
    return Tolerances.scaled(default, engine) if tol is None else tol


def lck_residual(geo):
    """||d omega - theta ^ omega|| + ||d theta|| per point."""
    r = geo.form_norm(geo.domega - wedge(geo.theta, geo.omega))
    return r + geo.form_norm(geo.dtheta)


def check_lck(s, samples, engine="ad", tol=None):
    geo = _geom(s, samples, engine)
    return make_verdict("lck", lck_residual(geo), _tol(tol, Tolerances.FIRST_ORDER, geo.engine), geo.points)


def check_vaisman(s, samples, engine="ad", tol=None):
    geo = _geom(s, samples, engine)
    return make_verdict("vaisman", geo.norm(geo.S, "ll"),
                        _tol(tol, Tolerances.FIRST_ORDER, geo.engine), geo.points)


def check_gauduchon(s, samples, engine="ad", tol=None):
    geo = _geom(s, samples, engine)
    return make_verdict("gauduchon", np.abs(geo.delta_theta.val),
                        _tol(tol, Tolerances.FIRST_ORDER, geo.engine), geo.points)


def potential_residual(geo):
    """||omega - theta ^ J theta + d J theta||."""
    return geo.form_norm(geo.omega - wedge(geo.theta, geo.Jtheta) + geo.dJtheta)


def check_potential(s, samples, engine="ad", tol=None):
    geo = _geom(s, samples, engine)
    return make_verdict("potential", potential_residual(geo),
                        _tol(tol, Tolerances.FIRST_ORDER, geo.engine), geo.points)


def holomorphy_residuals(geo, X=None):
    """(||L_X J||, ||[F, J]|| or None).  X defaults to the Lee field T."""
    lee = X is None
    X = geo.T if lee else X
    lie = geo.norm(conn.lie_derivative_endo(X, geo.J), "ul")
    if not lee:
        return lie, None
    F, J = geo.F.val, geo.J.val
    comm = np.einsum("zij,zjk->zik", J, F) - np.einsum("zij,zjk->zik", F, J)
    return lie, geo.norm(comm, "ul")


def check_holomorphic(s, samples, X=None, engine="ad", tol=None, name="holomorphic"):
    """Holomorphy of X (default: the Lee field T).

    For T the residual is the larger of ||L_T J|| and ||JF - FJ||; the two
    must also agree pointwise within the tolerance, since L_T J = JF - FJ on
    any lcK manifold.
    """
    geo = _geom(s, samples, engine)
    tol = _tol(tol, Tolerances.FIRST_ORDER, geo.engine)
    lie, comm = holomorphy_residuals(geo, X)
    if comm is None:
        return make_verdict(name, lie, tol, geo.points)
    gap = float(np.max(np.abs(lie - comm)))
    note = f"|L_T J| vs |[F,J]| max gap {gap:.3e}"
    return make_verdict(name, np.maximum(lie, comm), tol, geo.points, note=note, force_fail=gap > tol)


def check_killing(s, samples, X=None, engine="ad", tol=None, name="killing"):
    """||L_X g|| (X defaults to T)."""
    geo = _geom(s, samples, engine)
    X = geo.T if X is None else X
    lie = conn.lie_derivative_covariant(X, geo.g)
    return make_verdict(name, geo.norm(lie, "ll"), _tol(tol, Tolerances.FIRST_ORDER, geo.engine), geo.points)
