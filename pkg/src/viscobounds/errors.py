"""Exception types shared across the package."""


class BoundsError(Exception):
    """Base class for all package errors."""


class ModelMismatchError(BoundsError):
    """A phase model or pair is not supported for the requested side."""


class DegenerateContrastError(BoundsError):
    """The two phases have identical moduli at the requested Laplace argument."""


class DomainError(BoundsError, ValueError):
    """An argument lies outside the admissible range (e.g. a pole at or above 1)."""


class ConfigurationError(BoundsError, ValueError):
    """Inconsistent information set or run configuration."""


class InfeasibleError(BoundsError):
    """The constraint system admits no residues."""


class NumericalFailure(BoundsError):
    """An internal numerical routine failed to converge or returned garbage."""
