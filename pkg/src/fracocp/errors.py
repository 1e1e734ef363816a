"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FracOcpError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(FracOcpError, ValueError):
    """Invalid parameter combination (orders, truncation indices, grid sizes)."""


class DomainError(FracOcpError, ValueError):
    """Argument outside the domain where an operator is defined."""


class PoleError(DomainError):
    """Gamma function evaluated at a non-positive integer."""


class GammaOverflowError(FracOcpError, OverflowError):
    """Gamma function value not representable as a double."""


class CapabilityError(FracOcpError):
    """A required capability (derivative callable, closed-form control, ...) is missing."""


class BoundInapplicableError(ParameterError):
    """Truncation error bound requested where its formula does not apply."""


class GridMismatchError(ParameterError):
    """Grid does not start at the anchor point of an expansion scheme."""


class UnsupportedVariantError(FracOcpError):
    """Problem variant representable in the data model but not solvable."""


class IncompleteInputError(FracOcpError, ValueError):
    """Channels needed to evaluate a residual are missing."""


class SingularReductionError(FracOcpError):
    """Denominator of the reduced dynamics vanishes or changes sign."""


class IntegrationBlowupError(FracOcpError, ArithmeticError):
    """Right-hand side produced a non-finite value during integration."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class SingularJacobianError(FracOcpError, ArithmeticError):
    """Shooting Jacobian is numerically singular."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class BracketError(FracOcpError, ValueError):
    """Terminal-time bracket is degenerate or has no sign change."""


class ConfigError(FracOcpError, ValueError):
    """Invalid problem configuration file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
