"""Explicit chart models: flat Kähler space, the Hopf Vaisman model and its radial deformation.

All models live on (a subset of) R^{2n} with coordinates ordered
(x_1, y_1, ..., x_n, y_n) and the standard constant complex structure.  The
Hopf manifold S^1 x S^{2n-1} is represented by its universal cover
C^n \\ {0} with dilation-invariant tensors; compactness enters only through
the fundamental annulus 1 <= r <= a.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm as _normal
from scipy.stats import qmc

from .errors import ConfigError, StructureError
from .fields import Field
from .forms import Form, exterior_d, wedge
from .jets import constant_jet, jet_einsum
from .lck import Geometry, LckStructure, check_vaisman
from . import tensors as tn

__all__ = [
    "MODELS",
    "ModelDescriptor",
    "HopfModel",
    "RadialProfile",
    "DeformedHopfModel",
    "flat_kahler",
    "hopf_structure",
    "deform",
    "build_model",
    "sample_points",
    "dilation_residual",
]

MODELS = ("flat", "hopf", "hopf-deformed")
DEFAULT_A = math.exp(2.0 * math.pi)
DEFAULT_AMPLITUDE = 0.5


def _r2(x):
    return jet_einsum("i,i->", x, x)


def _const_field(kind, matrix, name):
    d = matrix.shape[0]

    def fn(x):
        return constant_jet(np.broadcast_to(matrix, (x.npoints,) + matrix.shape).copy(), d, x.order)

    return Field(kind, fn, d, name=name)


def _log_r_field(d, punctured=True):
    return Field("scalar", lambda x: _r2(x).log() * 0.5, d, name="log_r", punctured=punctured)


def _omega_field(g, J, d, punctured):
    return Field("twoform", lambda x: tn.fundamental_form(g(x), J(x)), d, name="omega", punctured=punctured)


# -- flat Kähler ---------------------------------------------------------------------

def flat_kahler(n, a=DEFAULT_A):
    """C^n with the Euclidean metric: Kähler, so theta = 0 and every identity degenerates to 0 = 0."""
    if n < 1:
        raise ConfigError("flat model needs n >= 1")
    d = 2 * n
    g = _const_field("metric", np.eye(d), "g")
    J = _const_field("endo", tn.standard_complex_structure(n), "J")
    theta = Field("oneform", lambda x: Form(1, constant_jet(np.zeros((x.npoints, d)), d, x.order)), d, name="theta")
    return LckStructure(
        name="flat", n=n, g=g, J=J, omega=_omega_field(g, J, d, False), theta=theta,
        extras={"log_r": _log_r_field(d)},
        params={"model": "flat", "n": n, "a": a, "kahler": True, "vaisman_model": True, "lee_norm_one": False},
    )


# -- Hopf --------------------------------------------------------------------------------

@dataclass(frozen=True)
class HopfModel:
    """C^n \\ {0} modulo x -> a x with metric 4 r^-2 g_flat and Lee form -2 dr / r."""

    n: int = 2
    a: float = DEFAULT_A

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("Hopf model needs complex dimension n >= 2")
        if not self.a > 1.0:
            raise ConfigError("dilation factor a must exceed 1")

    def structure(self):
        return hopf_structure(self.n, self.a)


def hopf_structure(n=2, a=DEFAULT_A):
    HopfModel(n, a)  # validates
    d = 2 * n
    eye = np.eye(d)

    def g_fn(x):
        return jet_einsum(",ij->ij", _r2(x).reciprocal() * 4.0, eye)

    def theta_fn(x):
        # theta = -2 dr / r = -2 x_i dx_i / r^2
        return Form(1, x * (_r2(x).reciprocal() * -2.0))

    g = Field("metric", g_fn, d, name="g", punctured=True)
    J = _const_field("endo", tn.standard_complex_structure(n), "J")
    theta = Field("oneform", theta_fn, d, name="theta", punctured=True)
    return LckStructure(
        name="hopf", n=n, g=g, J=J, omega=_omega_field(g, J, d, True), theta=theta,
        extras={"log_r": _log_r_field(d)},
        params={"model": "hopf", "n": n, "a": float(a), "kahler": False, "vaisman_model": True, "lee_norm_one": True},
    )


# -- radial profile and deformation ---------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """f(r) = amplitude * sin(2 pi ln r / ln a): a-periodic in ln r, bounded by the amplitude."""

    amplitude: float = DEFAULT_AMPLITUDE
    a: float = DEFAULT_A

    def __post_init__(self):
        if not self.a > 1.0:
            raise ConfigError("profile period a must exceed 1")
        if not abs(self.amplitude) < 1.0:
            raise ConfigError("profile amplitude must satisfy |amplitude| < 1 so that f > -1")

    @property
    def frequency(self):
        return 2.0 * math.pi / math.log(self.a)

    def __call__(self, r):
        return self.amplitude * np.sin(self.frequency * np.log(np.asarray(r, dtype=float)))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * self.frequency * np.cos(self.frequency * np.log(r)) / r

    def of_jet(self, x):
        # ln r = ln(r^2) / 2
        return (_r2(x).log() * (0.5 * self.frequency)).sin() * self.amplitude

    def field(self, d):
        return Field("scalar", self.of_jet, d, name="f", punctured=True)


@dataclass(frozen=True)
class DeformedHopfModel:
    base: HopfModel = HopfModel()
    profile: RadialProfile = RadialProfile()

    def structure(self, check_samples=64, seed=0):
        return deform(self.base.structure(), self.profile, check_samples=check_samples, seed=seed)


def deform(base, profile, check_samples=64, seed=0, tol=1e-9):
    """omega' = omega + f theta ^ J theta, g' = omega'(., J .), theta' = (1 + f) theta.

    Preconditions are checked on ``check_samples`` points of the fundamental
    annulus: the base is Vaisman with |theta| = 1, f > -1 and df ^ theta = 0.
    """
    d = base.dim
    a = float(base.params.get("a", profile.a))
    pts = sample_points(base.n, a, check_samples, seed)
    geo = Geometry(base, pts)
    v = check_vaisman(base, geo)
    if not v.passed:
        raise StructureError(f"deformation base is not Vaisman: max |nabla theta| = {v.max_residual:.3e}")
    norm_dev = float(np.max(np.abs(geo.theta_sq.val - 1.0)))
    if norm_dev > tol:
        raise StructureError(f"deformation base needs |theta| = 1, max deviation {norm_dev:.3e}")
    fvals = profile(np.linalg.norm(pts, axis=1))
    if np.any(fvals <= -1.0):
        raise StructureError(f"profile violates f > -1 (min {fvals.min():.3f})")
    f_field = profile.field(d)
    df = exterior_d(geo.eval_field(f_field))
    dft = geo.form_norm(wedge(df, geo.theta))
    if float(np.max(dft)) > 1e-11:
        raise StructureError(f"df ^ theta != 0 (max {float(np.max(dft)):.3e}); the profile must be radial")

    g0, J0, theta0, omega0 = base.g, base.J, base.theta, base.omega

    def omega_fn(x):
        th, Jm = theta0(x), J0(x)
        return omega0(x) + wedge(th, tn.j_on_oneform(Jm, th)) * profile.of_jet(x)

    def g_fn(x):
        w = jet_einsum("ik,kj->ij", omega_fn(x).full(), J0(x))
        return (w + w.transpose(1, 0)) * 0.5

    def theta_fn(x):
        return theta0(x) * (profile.of_jet(x) + 1.0)

    params = dict(base.params)
    params.update({"model": "hopf-deformed", "amplitude": profile.amplitude, "vaisman_model": False,
                   "lee_norm_one": False})
    return LckStructure(
        name="hopf-deformed", n=base.n,
        g=Field("metric", g_fn, d, name="g_bar", punctured=True),
        J=J0,
        omega=Field("twoform", omega_fn, d, name="omega_bar", punctured=True),
        theta=Field("oneform", theta_fn, d, name="theta_bar", punctured=True),
        extras={"log_r": base.extras["log_r"], "f": f_field, "base_theta": theta0, "base_g": g0,
                "base_omega": omega0},
        params=params,
    )


# -- descriptors ------------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelDescriptor:
    model: str = "hopf"
    n: int = 2
    a: float = DEFAULT_A
    amplitude: float = DEFAULT_AMPLITUDE

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")

    def to_dict(self):
        out = asdict(self)
        if self.model != "hopf-deformed":
            out.pop("amplitude")
        return out

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in ("model", "n", "a", "amplitude") if k in data}
        if "n" in known:
            known["n"] = int(known["n"])
        for k in ("a", "amplitude"):
            if k in known:
                known[k] = float(known[k])
        return cls(**known)


def build_model(desc):
    """LckStructure for a descriptor (or a plain dict with the same keys)."""
    if isinstance(desc, dict):
        desc = ModelDescriptor.from_dict(desc)
    if desc.model == "flat":
        return flat_kahler(desc.n, desc.a)
    if desc.model == "hopf":
        return hopf_structure(desc.n, desc.a)
    return DeformedHopfModel(HopfModel(desc.n, desc.a), RadialProfile(desc.amplitude, desc.a)).structure()


# -- sampling -----------------------------------------------------------------------------------

def sample_points(n, a, count, seed=0, min_coord=1e-6):
    """Deterministic low-discrepancy points in the annulus 1 <= r <= a of R^{2n}.

    ln r is uniform on [0, ln a] and the direction is the normalised inverse-normal
    image of scrambled Halton coordinates.  Points with any |x_i| < ``min_coord``
    are rejected.
    """
    d = 2 * n
    if count < 1:
        raise ConfigError("sample count must be positive")
    gen = qmc.Halton(d=d + 1, scramble=True, seed=seed)
    out = []
    while sum(len(o) for o in out) < count:
        u = gen.random(max(count, 16))
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
        direction = _normal.ppf(u[:, 1:])
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        pts = direction * np.exp(u[:, :1] * math.log(a))
        keep = np.all(np.abs(pts) >= min_coord, axis=1)
        out.append(pts[keep])
    return np.concatenate(out)[:count]


def dilation_residual(structure, points, a):
    """Max relative deviation of the pullbacks of g and theta under x -> a x."""
    pts = np.atleast_2d(points)
    g_p = structure.g.value(pts)
    g_ap = structure.g.value(a * pts)
    th_p = structure.theta.value(pts)
    th_ap = structure.theta.value(a * pts)
    rel_g = np.max(np.abs(a * a * g_ap - g_p)) / np.max(np.abs(g_p))
    rel_t = np.max(np.abs(a * th_ap - th_p)) / max(np.max(np.abs(th_p)), 1e-300)
    return float(max(rel_g, rel_t))
