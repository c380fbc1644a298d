"""Numerical verification of locally conformally Kähler identities on explicit chart models."""

from .errors import ConfigError, DegeneracyError, DegreeError, DomainError, JetOrderError, LckError, StructureError
from .jets import Jet, coords_jet, fd_jet, jet_einsum
from .forms import Form, exterior_d, interior, wedge
from .lck import CheckVerdict, Geometry, LckStructure, Tolerances
from .models import ModelDescriptor, build_model, sample_points
from .suite import REGISTRY, SuiteReport, run_check, run_suite, vaisman_criteria_consistency
from .quadrature import QuadratureGrid, check_integral_identities, integrate

__version__ = "0.1.0"

__all__ = [
    "LckError", "ConfigError", "DegeneracyError", "DegreeError", "DomainError", "JetOrderError", "StructureError",
    "Jet", "coords_jet", "fd_jet", "jet_einsum",
    "Form", "exterior_d", "interior", "wedge",
    "CheckVerdict", "Geometry", "LckStructure", "Tolerances",
    "ModelDescriptor", "build_model", "sample_points",
    "REGISTRY", "SuiteReport", "run_check", "run_suite", "vaisman_criteria_consistency",
    "QuadratureGrid", "check_integral_identities", "integrate",
]
