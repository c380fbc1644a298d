"""Tensor fields on a chart, evaluable as jets by automatic differentiation or finite differences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .forms import Form
from .jets import Jet, coords_jet, fd_jet

__all__ = ["Field", "ENGINES", "chart_points", "radius"]

ENGINES = ("ad", "fd")

FORM_DEGREE = {"oneform": 1, "twoform": 2, "threeform": 3}
KINDS = ("scalar", "vector", "oneform", "twoform", "threeform", "endo", "metric")


def chart_points(points, dim=None):
    """Validate and return an (N, d) float array of chart coordinates."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2:
        raise ValueError("chart points must be an (N, d) array")
    if dim is not None and pts.shape[1] != dim:
        raise ValueError(f"expected {dim} coordinates, got {pts.shape[1]}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("non-finite chart coordinates")
    return pts


def radius(points):
    return np.linalg.norm(np.atleast_2d(points), axis=1)


@dataclass(frozen=True)
class Field:
    """A component map from coordinate jets to a jet (or a packed :class:`Form` for form kinds).

    ``fn`` must be built from jet arithmetic without taking partial derivatives,
    so that the same map can be evaluated at order 0 on finite-difference stencils.
    """

    kind: str
    fn: Callable
    dim: int
    name: str = ""
    punctured: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")

    def _check_domain(self, pts):
        if self.punctured and np.any(radius(pts) <= 0.0):
            raise DomainError(f"field {self.name or self.kind} is undefined at r = 0")

    def __call__(self, x):
        return self.fn(x)

    def jet_eval(self, points, order=2, engine="ad", fd_step=1e-4):
        """Components at ``points`` with first and second coordinate derivatives."""
        pts = chart_points(points, self.dim)
        self._check_domain(pts)
        if engine == "ad":
            return self.fn(coords_jet(pts, order))
        if engine != "fd":
            raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")
        degree = FORM_DEGREE.get(self.kind)

        def values(stencil):
            out = self.fn(coords_jet(stencil, 0))
            return out.packed.val if degree else out.val

        jet = fd_jet(values, pts, step=fd_step, order=order)
        return Form(degree, jet) if degree else jet

    def value(self, points):
        out = self.jet_eval(points, order=0)
        return out.packed.val if isinstance(out, Form) else out.val
