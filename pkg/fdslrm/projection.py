"""Projector, Gram and Schur machinery shared by all estimators.

M_F is applied as y -> y - F (F'F)^-1 F'y and only materialized on request, so the
estimator pipelines stay linear in n for fixed k and l.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Literal, Optional, Tuple, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lu_factor, lu_solve

from .config import EFFECTIVE_ZERO_RTOL
from .design import DesignSet
from .exceptions import InputError, InvalidParameterError, NotOrthogonalError
from .models import GramVariant, VarianceComponents

logger = logging.getLogger(__name__)


def validated_nu(nu: Any, l: int) -> np.ndarray:  # noqa: E741
    """Return nu as a float array after checking length, nu_0 > 0 and nu_j >= 0."""
    if isinstance(nu, VarianceComponents):
        values = nu.as_array()
    else:
        values = np.asarray(nu, dtype=float).ravel()
    if values.size != l + 1:
        raise InvalidParameterError(f"nu needs {l + 1} entries, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError("nu must be finite")
    if values[0] <= 0:
        raise InvalidParameterError(f"nu_0 must be positive, got {values[0]}")
    if np.any(values[1:] < 0):
        raise InvalidParameterError(f"nu_j must be nonnegative, got {values[1:]}")
    return values


def effective_components(values: np.ndarray) -> np.ndarray:
    """nu_1..nu_l with entries below EFFECTIVE_ZERO_RTOL * max(nu) set to exactly 0."""
    scale = float(np.max(values))
    components = values[1:].copy()
    components[components < EFFECTIVE_ZERO_RTOL * scale] = 0.0
    return components


@dataclass(frozen=True, eq=False)
class TrendProjector:
    """Action of M_F = I - F (F'F)^-1 F' together with (F'F)^-1 and ln det F'F."""

    F: np.ndarray
    FtF_inv: np.ndarray
    FtF_logdet: float

    @classmethod
    def from_design(cls, F: np.ndarray) -> "TrendProjector":
        k = F.shape[1]
        if k == 0:
            return cls(F=F, FtF_inv=np.zeros((0, 0)), FtF_logdet=0.0)
        factor = cho_factor(F.T @ F)
        inverse = cho_solve(factor, np.eye(k))
        logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
        return cls(F=F, FtF_inv=inverse, FtF_logdet=logdet)

    def ols(self, y: np.ndarray) -> np.ndarray:
        """Least-squares coefficients (F'F)^-1 F'y."""
        return self.FtF_inv @ (self.F.T @ y)

    def apply(self, y: np.ndarray) -> np.ndarray:
        """M_F y for a vector or for each column of a matrix."""
        if self.F.shape[1] == 0:
            return np.array(y, dtype=float)
        return y - self.F @ self.ols(y)

    @cached_property
    def M(self) -> np.ndarray:
        """Dense n x n projector. O(n^2) memory."""
        return self.apply(np.eye(self.F.shape[0]))


@dataclass(frozen=True, eq=False)
class DesignProjection:
    """Series-independent products: M_F V and W = V'M_F V."""

    projector: TrendProjector
    MV: np.ndarray
    W: np.ndarray
    is_orthogonal: bool


def project_design(design: DesignSet) -> DesignProjection:
    projector = TrendProjector.from_design(design.F)
    if design.is_orthogonal:
        # F'V = 0 gives M_F V = V and W = diag(||v_j||^2)
        MV = design.V
        W = np.diag(design.column_norms_sq)
    else:
        MV = projector.apply(design.V)
        W = design.V.T @ MV
        W = 0.5 * (W + W.T)
    return DesignProjection(projector=projector, MV=MV, W=W, is_orthogonal=design.is_orthogonal)


@dataclass(frozen=True, eq=False)
class ProjectionCache:
    """OLS residual of one series plus the inner products the estimators need."""

    design_projection: DesignProjection
    x: np.ndarray
    eps: np.ndarray
    VtEps: np.ndarray
    eps_sq: float

    @property
    def projector(self) -> TrendProjector:
        return self.design_projection.projector

    @property
    def FtF_inv(self) -> np.ndarray:
        return self.projector.FtF_inv

    @property
    def W(self) -> np.ndarray:
        return self.design_projection.W

    @property
    def MV(self) -> np.ndarray:
        return self.design_projection.MV

    @property
    def M_F(self) -> np.ndarray:
        return self.projector.M


def as_series(series: Any, n: int) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if x.size != n:
        raise InputError(f"series has {x.size} observations but the model expects n={n}")
    if not np.all(np.isfinite(x)):
        raise InputError("series contains non-finite values")
    return x


def build_projection(
    design: DesignSet, series: Any, design_projection: Optional[DesignProjection] = None
) -> ProjectionCache:
    """Compute the OLS residual eps = M_F x and its inner products.

    Args:
        design: Realized design
        series: Observations x(1), ..., x(n)
        design_projection: Precomputed series-independent part, reused across series

    Returns:
        ProjectionCache

    Raises:
        InputError: If the series length differs from n
    """
    x = as_series(series, design.n)
    shared = design_projection if design_projection is not None else project_design(design)
    eps = shared.projector.apply(x)
    VtEps = design.V.T @ eps
    return ProjectionCache(
        design_projection=shared, x=x, eps=eps, VtEps=VtEps, eps_sq=float(eps @ eps)
    )


@dataclass(frozen=True, eq=False)
class GramSystem:
    """Arrow-structured normal equations G nu = q of the (M)DOOLSE problem."""

    G: np.ndarray
    q: np.ndarray
    n_star: float
    variant: GramVariant
    norms_sq: np.ndarray

    @property
    def l(self) -> int:  # noqa: E743
        return self.norms_sq.size


def n_star_for(design: DesignSet, variant: GramVariant) -> float:
    if variant == "DOOLSE":
        return float(design.n)
    if variant == "MDOOLSE":
        return float(design.n - design.k)
    raise ValueError(f"Unknown variant: {variant}. Use 'DOOLSE' or 'MDOOLSE'")


def gram_system(cache: ProjectionCache, design: DesignSet, variant: GramVariant = "MDOOLSE") -> GramSystem:
    """Build G and q for DOOLSE (n* = n) or MDOOLSE (n* = n - k).

    Raises:
        NotOrthogonalError: If the design is not orthogonal
    """
    if not design.is_orthogonal:
        raise NotOrthogonalError(
            "the arrow-form Gram system requires an orthogonal design (F'V = 0, V'V diagonal)"
        )
    a = np.asarray(design.column_norms_sq, dtype=float)
    l = a.size  # noqa: E741
    n_star = n_star_for(design, variant)
    G = np.zeros((l + 1, l + 1))
    G[0, 0] = n_star
    G[0, 1:] = a
    G[1:, 0] = a
    G[1:, 1:] = np.diag(a**2)
    q = np.concatenate(([cache.eps_sq], cache.VtEps**2))
    return GramSystem(G=G, q=q, n_star=n_star, variant=variant, norms_sq=a)


@dataclass(frozen=True, eq=False)
class SchurMatrices:
    """U* = W D + nu_0 I and W*^-1 = D U*^-1 at one nu; T* = D U*^-1 V'M_F.

    ``W_star`` is only present when D is nonsingular.
    """

    nu: np.ndarray
    D: np.ndarray
    U: np.ndarray
    U_inv: np.ndarray
    W_star_inv: np.ndarray
    W_star: Optional[np.ndarray]
    MV: np.ndarray

    @property
    def nu0(self) -> float:
        return float(self.nu[0])

    def apply_T(self, x: np.ndarray) -> np.ndarray:
        """T* x without forming T*."""
        return self.W_star_inv @ (self.MV.T @ x)

    @cached_property
    def T(self) -> np.ndarray:
        return self.W_star_inv @ self.MV.T


def schur_matrices(
    cache: Union[ProjectionCache, DesignProjection, None], design: DesignSet, nu: Any
) -> SchurMatrices:
    """Compute U*, W*^-1 and the T* action at nu.

    Singular D is handled through the U* form; W* = U* D^-1 is only formed when all
    nu_j are effectively positive.

    Raises:
        InvalidParameterError: If nu_0 <= 0 or some nu_j < 0
    """
    values = validated_nu(nu, design.l)
    if cache is None:
        shared = project_design(design)
    elif isinstance(cache, ProjectionCache):
        shared = cache.design_projection
    else:
        shared = cache
    D = effective_components(values)
    nu0 = float(values[0])
    l = design.l  # noqa: E741

    U = shared.W * D[np.newaxis, :] + nu0 * np.eye(l)
    if shared.is_orthogonal:
        U_inv = np.diag(1.0 / np.diag(U))
    else:
        U_inv = lu_solve(lu_factor(U), np.eye(l))
    W_star_inv = D[:, np.newaxis] * U_inv
    W_star_inv = 0.5 * (W_star_inv + W_star_inv.T)

    W_star = U / D[np.newaxis, :] if l and np.all(D > 0) else None
    return SchurMatrices(
        nu=values, D=D, U=U, U_inv=U_inv, W_star_inv=W_star_inv, W_star=W_star, MV=shared.MV
    )


def schur_determinant_identity(
    cache: Union[ProjectionCache, DesignProjection, None], design: DesignSet, nu: Any
) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Both sides of det U* = nu_0^(l-n) det(nu_0 I_n + M_F V D V'M_F) as slogdet pairs.

    Builds an n x n matrix, so it is meant for moderate n.
    """
    schur = schur_matrices(cache, design, nu)
    n, l = design.n, design.l  # noqa: E741
    lhs = np.linalg.slogdet(schur.U)
    inner = schur.nu0 * np.eye(n) + (schur.MV * schur.D[np.newaxis, :]) @ schur.MV.T
    sign, logdet = np.linalg.slogdet(inner)
    rhs = (float(sign), float(logdet + (l - n) * np.log(schur.nu0)))
    return (float(lhs[0]), float(lhs[1])), rhs
