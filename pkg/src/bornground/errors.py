"""Exception and warning classes shared across the package."""


class BornInfeldError(Exception):
    """Base class for every error raised by :mod:`bornground`."""


class DomainError(BornInfeldError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PreconditionError(BornInfeldError, ValueError):
    """Parameters violate a structural requirement (exponent range, oddness, ...)."""


class ConfigurationError(BornInfeldError, ValueError):
    """Inconsistent or malformed configuration (grid, dimension, config file)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConstraintViolation(BornInfeldError, ValueError):
    """A profile leaves the admissible set ``|u'| < 1``."""

    def __init__(self, max_gradient, limit):
        super().__init__(
            f"gradient constraint violated: max|du| = {max_gradient:.17g} exceeds {limit:.17g}"
        )
        self.max_gradient = max_gradient
        self.limit = limit


class DegenerateInputError(BornInfeldError, ValueError):
    """The zero profile (or another degenerate input) was passed where u != 0 is required."""


class NoRootError(BornInfeldError, RuntimeError):
    """Bracket expansion for the scaling root hit the overflow guard."""


class StepFailure(BornInfeldError, RuntimeError):
    """Backtracking exhausted without an acceptable step."""


class ConstraintStallError(BornInfeldError, RuntimeError):
    """The iterate is pinned against the gradient cap and cannot move."""


class NumericalFailure(BornInfeldError, ArithmeticError):
    """A non-finite value appeared during an iteration."""


class BracketError(BornInfeldError, ValueError):
    """Shooting bracket endpoints fall on the same side of the ground state."""


class MultiStartFailure(BornInfeldError, RuntimeError):
    """Every start of a multi-start run failed."""

    def __init__(self, failures):
        lines = "; ".join(f"start {i}: {type(e).__name__}: {e}" for i, e in failures)
        super().__init__(f"all starts failed ({lines})")
        self.failures = failures


class TruncationWarning(UserWarning):
    """The computed profile has not decayed enough at the truncation radius."""


class AuditWarning(UserWarning):
    """A nonlinearity failed one of its sampled hypothesis checks."""
