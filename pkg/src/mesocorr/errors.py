"""Exception hierarchy.  The CLI maps ValidationError -> exit 2 and
CapacityError / CoverageError -> exit 3."""


class MesocorrError(Exception):
    pass


class ValidationError(MesocorrError, ValueError):
    """Bad parameters or configuration."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class SingularPointError(DomainError):
    """log Z requested exactly at an eigenvalue on the unit circle."""


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(MesocorrError):
    """Request exceeds a hard resource ceiling (e.g. sieve limit)."""


class CoverageError(MesocorrError):
    """A table (primes, zeros) does not cover the requested range."""
