"""Mesoscopic covariance laboratory for log-characteristic polynomials of CUE
matrices, Dirichlet-polynomial models of log zeta, zero-counting fluctuations
and the tree-indexed Gaussian vectors realizing the ``1 ^ c`` kernel."""

from mesocorr.rng import RngStream
from mesocorr.errors import (
    CapacityError,
    CoverageError,
    DomainError,
    MesocorrError,
    ParseError,
    SingularPointError,
    ValidationError,
)

__all__ = [
    "RngStream",
    "MesocorrError",
    "ValidationError",
    "DomainError",
    "SingularPointError",
    "CapacityError",
    "CoverageError",
    "ParseError",
]

__version__ = "0.1.0"
