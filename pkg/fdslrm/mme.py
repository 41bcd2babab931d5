"""Henderson's mixed model equations: BLUE of beta, BLUP of Y and residuals."""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .design import DesignSet
from .models import PredictorIdentityResiduals
from .projection import (
    DesignProjection,
    ProjectionCache,
    as_series,
    project_design,
    schur_matrices,
)


@dataclass(frozen=True, eq=False)
class BlupResult:
    """BLUE beta*, BLUP Y* and the decomposition of the series they imply."""

    beta_hat: np.ndarray
    y_hat: np.ndarray
    trend: np.ndarray
    signal: np.ndarray
    conditional_residuals: np.ndarray
    marginal_residuals: np.ndarray
    nu: np.ndarray

    @property
    def fitted(self) -> np.ndarray:
        return self.trend + self.signal


def solve_mme(
    design: DesignSet,
    series: Any,
    nu: Any,
    cache: Optional[ProjectionCache] = None,
) -> BlupResult:
    """Solve the D-multiplied mixed model equations for (beta*, Y*).

    With Y* = D Z*, the second block row reduces to U* Z* = V'M_F x, so
    Y* = D U*^-1 V'M_F x = T* x and beta* = (F'F)^-1 F'(x - V Y*). Zero
    components of nu give exactly zero entries of Y*.

    Args:
        design: Realized design
        series: Observations x(1), ..., x(n)
        nu: Variance components with nu_0 > 0 and nu_j >= 0
        cache: Projection of the same series, reused when given

    Returns:
        BlupResult

    Raises:
        InvalidParameterError: If nu is outside the parametric space
    """
    x = as_series(series, design.n)
    shared: DesignProjection = (
        cache.design_projection if cache is not None else project_design(design)
    )
    schur = schur_matrices(shared, design, nu)
    y_hat = schur.apply_T(x)

    signal = design.V @ y_hat
    beta_hat = shared.projector.ols(x - signal)
    trend = design.F @ beta_hat
    return BlupResult(
        beta_hat=beta_hat,
        y_hat=y_hat,
        trend=trend,
        signal=signal,
        conditional_residuals=x - trend - signal,
        marginal_residuals=x - trend,
        nu=schur.nu,
    )


def predictor_identities(design: DesignSet, nu: Any) -> PredictorIdentityResiduals:
    """Max-abs residuals of the basic T* identities at nu.

    Checked identities, with A = I - nu_0 U*^-1:
      T*T*' = D U*^-1 A;  T*F = 0 and T*V = A';  T* Sigma T*' = D A.
    A is diagonal in orthogonal designs, where T*V = A as usually stated.
    """
    schur = schur_matrices(None, design, nu)
    l = design.l  # noqa: E741
    T = schur.T
    A = np.eye(l) - schur.nu0 * schur.U_inv
    D = np.diag(schur.D)

    TT = T @ T.T
    product = _max_abs(TT - schur.W_star_inv @ A)

    TV = T @ design.V
    projection = max(_max_abs(T @ design.F), _max_abs(TV - A.T))

    # T Sigma T' without forming the n x n covariance
    covariance_side = schur.nu0 * TT + TV @ D @ TV.T
    covariance = _max_abs(covariance_side - D @ A)
    return PredictorIdentityResiduals(product=product, projection=projection, covariance=covariance)


def _max_abs(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix))) if matrix.size else 0.0
