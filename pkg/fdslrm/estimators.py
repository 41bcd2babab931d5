"""Initial estimators of the variance components of an orthogonal FDSLRM.

NE has a closed form. Projection (M)DOOLSE solves the arrow-structured normal
equations G nu = q. NN-(M)DOOLSE minimizes nu'G nu - 2 q'nu over nu >= 0 by
scanning active patterns b in {0,1}^l and solving each KKT system K(b) g = q
in closed form. In an orthogonal FDSLRM NN-DOOLSE is the MLE and NN-MDOOLSE is
the REMLE, so (RE)ML needs no iterative solver.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, List, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .config import BESSEL_DEFECT_RTOL, KKT_ACCEPT_RTOL
from .design import DesignSet
from .exceptions import (
    DegenerateResidualError,
    InvalidParameterError,
    KktSearchError,
    NonPositiveDefiniteError,
    NotOrthogonalError,
)
from .models import (
    DualVariables,
    GramVariant,
    KktSolution,
    LikelihoodSolution,
    LikelihoodVariant,
    ProjectionEstimate,
    VarianceComponents,
)
from .projection import GramSystem, ProjectionCache, gram_system, n_star_for, validated_nu

logger = logging.getLogger(__name__)

Pattern = Tuple[int, ...]


def _require_orthogonal(design: DesignSet, what: str) -> None:
    if not design.is_orthogonal:
        raise NotOrthogonalError(f"{what} is only defined for orthogonal designs (F'V = 0, V'V diagonal)")


def bessel_defect(cache: ProjectionCache, design: DesignSet) -> float:
    """eps'eps - sum_j (eps'v_j)^2 / ||v_j||^2, nonnegative by Bessel's inequality."""
    return float(cache.eps_sq - np.sum(cache.VtEps**2 / design.column_norms_sq))


def is_degenerate_residual(cache: ProjectionCache, design: DesignSet) -> bool:
    """True when the OLS residual lies (numerically) in span(V)."""
    _require_orthogonal(design, "the residual degeneracy test")
    return bessel_defect(cache, design) <= BESSEL_DEFECT_RTOL * cache.eps_sq


def estimate_ne(cache: ProjectionCache, design: DesignSet) -> VarianceComponents:
    """Natural estimators.

    nu_0 = (eps'eps - sum_j (eps'v_j)^2/||v_j||^2) / (n - k - l) and
    nu_j = (eps'v_j)^2 / ||v_j||^4. A defect lost to rounding is clamped to 0.
    """
    _require_orthogonal(design, "NE")
    a = design.column_norms_sq
    defect = bessel_defect(cache, design)
    if defect <= BESSEL_DEFECT_RTOL * cache.eps_sq:
        logger.warning("OLS residual lies in span(V); NE gives nu_0 = 0")
        defect = 0.0
    nu0 = max(defect, 0.0) / (design.n - design.k - design.l)
    components = cache.VtEps**2 / a**2
    return VarianceComponents(nu=(float(nu0),) + tuple(float(v) for v in components))


def estimate_projection_doolse(gram: GramSystem) -> ProjectionEstimate:
    """Unconstrained (M)DOOLSE G^-1 q; negative entries are kept and flagged."""
    values = cho_solve(cho_factor(gram.G), gram.q)
    has_negative = bool(np.any(values < 0))
    if has_negative:
        logger.warning(
            "Projection %s estimate leaves the parametric space: %s", gram.variant, values
        )
    return ProjectionEstimate(
        variant=gram.variant, values=tuple(float(v) for v in values), has_negative=has_negative
    )


def kkt_patterns(l: int) -> List[Pattern]:  # noqa: E741
    """All b in {0,1}^l by descending popcount, lexicographic within a popcount."""
    patterns = list(itertools.product((0, 1), repeat=l))
    patterns.sort(key=sum, reverse=True)
    return patterns


def _check_pattern(gram: GramSystem, pattern: Sequence[int]) -> np.ndarray:
    b = np.asarray(pattern, dtype=int)
    if b.shape != (gram.l,) or np.any((b != 0) & (b != 1)):
        raise ValueError(f"pattern must be a 0/1 vector of length {gram.l}, got {tuple(pattern)}")
    return b


def kkt_matrix(gram: GramSystem, pattern: Sequence[int]) -> np.ndarray:
    """Dense K(b) of the KKT system K(b) g = q.

    g = (nu_0, g_1..g_l) with g_j = nu_j where b_j = 1 and g_j = lambda_j where b_j = 0.
    """
    b = _check_pattern(gram, pattern)
    a = gram.norms_sq
    K = np.zeros((gram.l + 1, gram.l + 1))
    K[0, 0] = gram.n_star
    K[0, 1:] = b * a
    K[1:, 0] = a
    K[1:, 1:] = np.diag(b * a**2 + b - 1)
    return K


def kkt_inverse(gram: GramSystem, pattern: Sequence[int]) -> np.ndarray:
    """Closed-form K(b)^-1 from the block structure [[n*, c'], [a, D_b]].

    With phi = n* - c'D_b^-1 a = n* - |b|:
    K^-1 = [[1/phi, -c'D_b^-1/phi], [-D_b^-1 a/phi, D_b^-1 + D_b^-1 a c'D_b^-1/phi]].
    """
    b = _check_pattern(gram, pattern)
    a = gram.norms_sq
    c = b * a
    d_inv = 1.0 / (b * a**2 + b - 1)
    phi = gram.n_star - float(b.sum())
    left = d_inv * a
    right = c * d_inv
    inverse = np.empty((gram.l + 1, gram.l + 1))
    inverse[0, 0] = 1.0 / phi
    inverse[0, 1:] = -right / phi
    inverse[1:, 0] = -left / phi
    inverse[1:, 1:] = np.diag(d_inv) + np.outer(left, right) / phi
    return inverse


def solve_kkt_system(gram: GramSystem, pattern: Sequence[int]) -> np.ndarray:
    """Apply the closed-form K(b)^-1 to q in O(l)."""
    b = _check_pattern(gram, pattern).astype(bool)
    a = gram.norms_sq
    q0, qv = gram.q[0], gram.q[1:]
    phi = gram.n_star - float(b.sum())
    g0 = (q0 - float(np.sum(qv[b] / a[b]))) / phi
    g = np.empty(gram.l + 1)
    g[0] = g0
    g[1:] = np.where(b, (qv - a * g0) / np.where(b, a**2, 1.0), a * g0 - qv)
    return g


def _degenerate_solution(gram: GramSystem) -> KktSolution:
    a = gram.norms_sq
    components = gram.q[1:] / a**2
    return KktSolution(
        variant=gram.variant,
        nu_hat=VarianceComponents(nu=(0.0,) + tuple(float(v) for v in components)),
        active_pattern=tuple(int(v > 0) for v in components),
        systems_tried=0,
        lagrange=(0.0,) * gram.l,
        n_star=gram.n_star,
        degenerate=True,
    )


def estimate_nn_doolse(gram: GramSystem) -> KktSolution:
    """Nonnegative (M)DOOLSE by the KKT pattern scan.

    The first pattern b whose solution g satisfies g >= -tol is accepted, where
    tol = KKT_ACCEPT_RTOL * max(1, ||q||_inf); accepted near-zero negatives are set
    to exactly 0. Components that land on the boundary are reported in
    ``boundary_ties`` and get b_j = 0 in ``active_pattern``.

    Args:
        gram: Arrow-form Gram system; ``gram.variant`` selects DOOLSE or MDOOLSE

    Returns:
        KktSolution with the estimate, active pattern and multipliers

    Raises:
        DegenerateResidualError: If eps lies in span(V); ``.solution`` holds the
            flagged solution nu_0 = 0, nu_j = (eps'v_j)^2 / ||v_j||^4
        KktSearchError: If no pattern is accepted
    """
    a = gram.norms_sq
    q0 = float(gram.q[0])
    defect = q0 - float(np.sum(gram.q[1:] / a))
    if defect <= BESSEL_DEFECT_RTOL * q0:
        raise DegenerateResidualError(
            "OLS residual lies in span(V); the minimizer has nu_0 = 0",
            solution=_degenerate_solution(gram),
        )

    tol = KKT_ACCEPT_RTOL * max(1.0, float(np.max(np.abs(gram.q))))
    for tried, pattern in enumerate(kkt_patterns(gram.l), start=1):
        g = solve_kkt_system(gram, pattern)
        if np.any(g < -tol):
            continue
        tied = g[1:] <= tol
        ties = tuple(int(j) + 1 for j in np.flatnonzero(tied))
        g[1:] = np.where(tied, 0.0, g[1:])
        # b_j = 0 exactly where nu_j = 0; a tied component has a zero multiplier either way
        b = np.asarray(pattern, dtype=bool) & ~tied
        nu = np.zeros(gram.l + 1)
        nu[0] = max(g[0], 0.0)
        nu[1:][b] = g[1:][b]
        lagrange = np.where(b, 0.0, g[1:])
        logger.debug("%s accepted b=%s after %d systems", gram.variant, pattern, tried)
        if ties:
            logger.warning("%s boundary tie on components %s", gram.variant, ties)
        return KktSolution(
            variant=gram.variant,
            nu_hat=VarianceComponents(nu=tuple(float(v) for v in nu)),
            active_pattern=tuple(int(v) for v in b),
            systems_tried=tried,
            lagrange=tuple(float(v) for v in lagrange),
            n_star=gram.n_star,
            boundary_ties=ties,
        )
    raise KktSearchError(f"no KKT pattern accepted among {2 ** gram.l} candidates")


@dataclass(frozen=True)
class KktCertificate:
    """Optimality conditions of a nonnegative (M)DOOLSE solution."""

    primal_feasible: bool
    dual_feasible: bool
    stationarity_residual: float
    complementary_slackness: float

    @property
    def holds(self) -> bool:
        return self.primal_feasible and self.dual_feasible and self.complementary_slackness == 0.0


def kkt_certificate(gram: GramSystem, solution: KktSolution) -> KktCertificate:
    """Check G nu - lambda_aug = q, nu >= 0, lambda >= 0 and nu o lambda = 0."""
    nu = solution.nu_hat.as_array()
    lagrange = np.asarray(solution.lagrange, dtype=float)
    lagrange_aug = np.concatenate(([0.0], lagrange))
    residual = gram.G @ nu - lagrange_aug - gram.q
    return KktCertificate(
        primal_feasible=bool(np.all(nu >= 0)),
        dual_feasible=bool(np.all(lagrange >= 0)),
        stationarity_residual=float(np.max(np.abs(residual))),
        complementary_slackness=float(np.max(np.abs(nu[1:] * lagrange), initial=0.0)),
    )


def quadratic_objective(gram: GramSystem, nu: Any) -> float:
    """nu'G nu - 2 q'nu, the (M)DOOLSE criterion up to a constant."""
    values = np.asarray(nu, dtype=float)
    return float(values @ gram.G @ values - 2.0 * gram.q @ values)


def _gram_variant(variant: LikelihoodVariant) -> GramVariant:
    if variant == "ML":
        return "DOOLSE"
    if variant == "REML":
        return "MDOOLSE"
    raise ValueError(f"Unknown variant: {variant}. Use 'ML' or 'REML'")


def estimate_remle(
    cache: ProjectionCache, design: DesignSet, variant: LikelihoodVariant = "REML"
) -> LikelihoodSolution:
    """(RE)MLE of an orthogonal FDSLRM via NN-(M)DOOLSE.

    ML uses NN-DOOLSE and REML uses NN-MDOOLSE. When eps lies in span(V) the
    (RE)MLE does not exist; the flagged NN-(M)DOOLSE extension is returned with
    ``exists=False`` and no log-likelihood.
    """
    _require_orthogonal(design, f"{variant} via NN-(M)DOOLSE")
    gram = gram_system(cache, design, _gram_variant(variant))
    try:
        solution = estimate_nn_doolse(gram)
    except DegenerateResidualError as e:
        logger.warning("%sE does not exist: %s", variant, e)
        return LikelihoodSolution(variant=variant, solution=e.solution, loglik=None, exists=False)
    value = loglik(cache, design, solution.nu_hat, variant)
    return LikelihoodSolution(variant=variant, solution=solution, loglik=value)


def estimate_mle(cache: ProjectionCache, design: DesignSet) -> LikelihoodSolution:
    return estimate_remle(cache, design, "ML")


def loglik(
    cache: ProjectionCache,
    design: DesignSet,
    nu: Any,
    variant: LikelihoodVariant = "ML",
    dense: bool = False,
) -> float:
    """ML or REML log-likelihood at nu, without the -(n/2) ln(2 pi) constant.

    Orthogonal designs use ln det Sigma^-1 = (n - l) ln d_0 + sum_j ln(d_0 - d_j ||v_j||^2)
    and ||eps||^2_{Sigma^-1} = d_0 eps'eps - sum_j d_j (eps'v_j)^2. Other designs, or
    ``dense=True``, evaluate the dense Cholesky factor of Sigma with the GLS residual.

    Raises:
        InvalidParameterError: If nu_0 <= 0 or some nu_j < 0
        NonPositiveDefiniteError: If the dense Sigma is not positive definite
    """
    values = validated_nu(nu, design.l)
    _gram_variant(variant)
    if design.is_orthogonal and not dense:
        return _loglik_orthogonal(cache, design, values, variant)
    return _loglik_dense(cache, design, values, variant)


def _loglik_orthogonal(
    cache: ProjectionCache, design: DesignSet, values: np.ndarray, variant: LikelihoodVariant
) -> float:
    a = design.column_norms_sq
    nu0, components = values[0], values[1:]
    d0 = 1.0 / nu0
    d = components / (nu0 * (nu0 + a * components))
    # d_0 - d_j ||v_j||^2 = 1 / (nu_0 + nu_j ||v_j||^2)
    logdet_inv = (design.n - design.l) * np.log(d0) - float(np.sum(np.log(nu0 + a * components)))
    quad = d0 * cache.eps_sq - float(np.sum(d * cache.VtEps**2))
    value = 0.5 * logdet_inv - 0.5 * quad
    if variant == "REML":
        value -= 0.5 * (design.k * np.log(d0) + cache.projector.FtF_logdet)
    return float(value)


def _loglik_dense(
    cache: ProjectionCache, design: DesignSet, values: np.ndarray, variant: LikelihoodVariant
) -> float:
    sigma = design.covariance(values)
    try:
        factor = cho_factor(sigma, lower=True)
    except LinAlgError as e:
        raise NonPositiveDefiniteError(f"Sigma is not positive definite at nu={values}") from e
    logdet_inv = -2.0 * float(np.sum(np.log(np.diag(factor[0]))))

    F = design.F
    residual = cache.x
    reml_term = 0.0
    if design.k:
        sigma_inv_F = cho_solve(factor, F)
        info = F.T @ sigma_inv_F
        info_factor = cho_factor(info)
        beta = cho_solve(info_factor, sigma_inv_F.T @ cache.x)
        residual = cache.x - F @ beta
        reml_term = 2.0 * float(np.sum(np.log(np.diag(info_factor[0]))))
    quad = float(residual @ cho_solve(factor, residual))
    value = 0.5 * logdet_inv - 0.5 * quad
    if variant == "REML":
        value -= 0.5 * reml_term
    return float(value)


def nu_to_d(nu: Any, design: DesignSet) -> DualVariables:
    """Map nu to d: d_0 = 1/nu_0, d_j = nu_j / (nu_0 (nu_0 + ||v_j||^2 nu_j))."""
    values = validated_nu(nu, design.l)
    a = design.column_norms_sq
    nu0, components = values[0], values[1:]
    d = components / (nu0 * (nu0 + a * components))
    return DualVariables(d=(1.0 / float(nu0),) + tuple(float(v) for v in d))


def d_to_nu(d: Any, design: DesignSet) -> VarianceComponents:
    """Inverse of ``nu_to_d``: nu_0 = 1/d_0, nu_j = d_j / (d_0 (d_0 - d_j ||v_j||^2)).

    Raises:
        InvalidParameterError: If d_0 <= d_j ||v_j||^2 for some j or d_j < 0
    """
    values = d.as_array() if isinstance(d, DualVariables) else np.asarray(d, dtype=float).ravel()
    if values.size != design.l + 1:
        raise InvalidParameterError(f"d needs {design.l + 1} entries, got {values.size}")
    a = design.column_norms_sq
    d0, dj = values[0], values[1:]
    gap = d0 - dj * a
    if d0 <= 0 or np.any(dj < 0) or np.any(gap <= 0):
        raise InvalidParameterError(f"d is outside the domain d_0 > d_j ||v_j||^2 >= 0: {values}")
    components = dj / (d0 * gap)
    return VarianceComponents(nu=(1.0 / float(d0),) + tuple(float(v) for v in components))


def dual_objective(
    d: Any, cache: ProjectionCache, design: DesignSet, variant: LikelihoodVariant = "ML"
) -> float:
    """Convex objective in d whose minimizer is nu_to_d of the (RE)MLE.

    f(d) = -(n* - l) ln d_0 - sum_j ln(d_0 - d_j ||v_j||^2) + d_0 eps'eps - sum_j d_j (eps'v_j)^2,
    with n* = n for ML and n - k for REML. Returns +inf outside the domain.
    """
    values = d.as_array() if isinstance(d, DualVariables) else np.asarray(d, dtype=float).ravel()
    a = design.column_norms_sq
    d0, dj = values[0], values[1:]
    gap = d0 - dj * a
    if d0 <= 0 or np.any(dj < 0) or np.any(gap <= 0):
        return float("inf")
    n_star = n_star_for(design, _gram_variant(variant))
    return float(
        -(n_star - design.l) * np.log(d0)
        - np.sum(np.log(gap))
        + d0 * cache.eps_sq
        - np.sum(dj * cache.VtEps**2)
    )

