"""Exception hierarchy shared by every module of the package."""


class ChiralChainError(Exception):
    """Base class for all errors raised by chiralchain."""


class ModelError(ChiralChainError, ValueError):
    """Model parameters outside the validity range of the requested formula."""


class NormalizationError(ChiralChainError, ValueError):
    """Initial amplitude vector is not normalized."""


class GridError(ChiralChainError, ValueError):
    """Time grid too coarse to resolve the requested feature."""


class DomainError(ChiralChainError, ValueError):
    """Special function evaluated outside its domain."""


class SingularityError(ChiralChainError, ValueError):
    """Green's tensor requested at coincident points."""


class GeometryError(ChiralChainError, ValueError):
    """Invalid emitter positions (or positions that could not be sampled)."""


class NumericalError(ChiralChainError, ArithmeticError):
    """A numerical self-check failed."""


class ConvergenceError(NumericalError):
    """Series truncation or quadrature did not reach the requested tolerance."""


class NoRootError(NumericalError):
    """No dispersion root found in the search region."""


class StepSizeError(NumericalError):
    """Adaptive ODE integration stalled."""


class ConfigError(ChiralChainError, ValueError):
    """Invalid run configuration."""
