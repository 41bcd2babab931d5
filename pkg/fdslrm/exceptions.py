"""Custom exceptions for fdslrm."""

from typing import Any, Optional


class FdslrmError(Exception):
    """Base exception for fdslrm errors."""
    pass


class InputError(FdslrmError):
    """Exception raised when input data or configuration cannot be parsed."""
    pass


class ModelError(FdslrmError):
    """Exception raised when the model structure is unusable."""
    pass


class RankDeficientError(ModelError):
    """Exception raised when the design (F V) does not have full column rank."""
    pass


class DegenerateColumnError(ModelError):
    """Exception raised when a random-component column is numerically zero."""
    pass


class NotOrthogonalError(ModelError):
    """Exception raised when an orthogonal-only estimator gets a non-orthogonal design."""
    pass


class InvalidParameterError(FdslrmError):
    """Exception raised when variance parameters fall outside an operation's domain."""
    pass


class NonPositiveDefiniteError(FdslrmError):
    """Exception raised when a covariance matrix fails its Cholesky factorization."""
    pass


class DegenerateResidualError(FdslrmError):
    """Exception raised when the OLS residual lies in the column space of V.

    The flagged extension (nu_0 = 0, nu_j = alpha_j^2) is attached as ``solution``.
    """

    def __init__(self, message: str, solution: Optional[Any] = None):
        super().__init__(message)
        self.solution = solution


class KktSearchError(FdslrmError):
    """Exception raised when no KKT pattern passes the nonnegativity test."""
    pass
