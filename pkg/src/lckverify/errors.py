"""Exception hierarchy used across the package."""


class LckError(Exception):
    """Base class for all lckverify errors."""


class DomainError(LckError, ValueError):
    """A point lies outside the chart domain of a field (e.g. r = 0 on a Hopf chart)."""


class DegeneracyError(LckError, ArithmeticError):
    """A metric or frame is numerically singular at an evaluation point."""


class DegreeError(LckError, ValueError):
    """A form operation would exceed the supported degree range."""


class StructureError(LckError, ValueError):
    """A structure or construction precondition failed (incompatible g/J, f <= -1, ...)."""


class JetOrderError(LckError, ValueError):
    """A derivative was requested beyond the order carried by a jet."""


class ConfigError(LckError, ValueError):
    """Invalid run configuration."""
