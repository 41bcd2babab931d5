"""EBLUP-NE two-stage estimator and exact moments of NE and BLUP-NE."""

import logging
from typing import Any, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .design import DesignSet
from .estimators import (
    estimate_ne,
    estimate_nn_doolse,
    estimate_remle,
)
from .exceptions import DegenerateResidualError, NotOrthogonalError
from .models import EblupNeResult, EstimationResult, KktSolution, MomentSummary, VarianceComponents
from .projection import (
    ProjectionCache,
    build_projection,
    gram_system,
    project_design,
    schur_matrices,
    validated_nu,
)

logger = logging.getLogger(__name__)

InitialMethod = Literal["NE", "NN-DOOLSE", "NN-MDOOLSE", "MLE", "REMLE"]
INITIAL_METHODS: Tuple[str, ...] = ("NE", "NN-DOOLSE", "NN-MDOOLSE", "MLE", "REMLE")


def shrinkage_factors(nu: Any, design: DesignSet) -> Tuple[np.ndarray, bool]:
    """rho_j = nu_j ||v_j||^2 / (nu_0 + nu_j ||v_j||^2) and a zero-noise flag.

    At nu_0 = 0 the continuous limit is used: rho_j = 1 for nu_j > 0, else 0,
    and the flag is set.
    """
    values = nu.as_array() if isinstance(nu, VarianceComponents) else np.asarray(nu, dtype=float)
    nu0, components = float(values[0]), values[1:]
    a = design.column_norms_sq
    if nu0 > 0:
        return components * a / (nu0 + components * a), False
    return np.where(components > 0, 1.0, 0.0), True


def _from_kkt(method: str, solution: KktSolution, loglik: Optional[float] = None) -> EstimationResult:
    notes = []
    if solution.degenerate:
        notes.append("OLS residual in span(V): nu_0 = 0 is outside the parametric space")
    if solution.boundary_ties:
        notes.append(f"boundary tie on components {list(solution.boundary_ties)}")
    return EstimationResult(
        method=method,
        estimate=solution.nu_hat.nu,
        nonnegative=True,
        degenerate=solution.degenerate,
        active_pattern=solution.active_pattern,
        systems_tried=solution.systems_tried,
        lagrange=solution.lagrange,
        loglik=loglik,
        notes=tuple(notes),
    )


def initial_estimate(
    cache: ProjectionCache, design: DesignSet, method: str, strict: bool = False
) -> EstimationResult:
    """Run one stage-1 estimator and wrap it as an EstimationResult.

    A residual in span(V) yields the flagged nu_0 = 0 solution unless ``strict``,
    in which case DegenerateResidualError propagates.
    """
    key = method.upper()
    if key == "NE":
        ne = estimate_ne(cache, design)
        if strict and not ne.is_admissible:
            raise DegenerateResidualError("NE has nu_0 = 0: OLS residual in span(V)", solution=ne)
        return EstimationResult(method="NE", estimate=ne.nu, degenerate=not ne.is_admissible)
    if key in ("NN-DOOLSE", "NN-MDOOLSE"):
        variant = "DOOLSE" if key == "NN-DOOLSE" else "MDOOLSE"
        try:
            solution = estimate_nn_doolse(gram_system(cache, design, variant))
        except DegenerateResidualError as e:
            if strict:
                raise
            solution = e.solution
        return _from_kkt(key, solution)
    if key in ("MLE", "REMLE"):
        result = estimate_remle(cache, design, "ML" if key == "MLE" else "REML")
        if strict and not result.exists:
            raise DegenerateResidualError(f"{key} does not exist: OLS residual in span(V)", solution=result.solution)
        return _from_kkt(key, result.solution, result.loglik)
    raise ValueError(f"Unknown initial method: {method}. Use one of {', '.join(INITIAL_METHODS)}")


def eblup_ne(
    design: DesignSet,
    series: Any,
    initial_method: str = "REMLE",
    cache: Optional[ProjectionCache] = None,
    strict: bool = False,
) -> EblupNeResult:
    """Two-stage EBLUP-NE.

    Stage 1 estimates nu with ``initial_method``; stage 2 plugs it into the BLUP,
    giving sigma_j^2 = (Y*_j)^2 = rho_j^2 * NE_j, while sigma_0^2 is the NE value.

    Args:
        design: Orthogonal design
        series: Observations x(1), ..., x(n)
        initial_method: One of NE, NN-DOOLSE, NN-MDOOLSE, MLE, REMLE
        cache: Projection of the same series, reused when given
        strict: Raise on a residual in span(V) instead of flagging it

    Returns:
        EblupNeResult

    Raises:
        NotOrthogonalError: If the design is not orthogonal
    """
    if not design.is_orthogonal:
        raise NotOrthogonalError("EBLUP-NE is only defined for orthogonal designs")
    if cache is None:
        cache = build_projection(design, series)
    initial = initial_estimate(cache, design, initial_method, strict=strict)
    return plug_in(initial, estimate_ne(cache, design), design)


def plug_in(initial: EstimationResult, ne: VarianceComponents, design: DesignSet) -> EblupNeResult:
    """Stage 2 of EBLUP-NE for an already computed stage-1 estimate and NE."""
    rho, zero_limit = shrinkage_factors(initial.estimate, design)
    if zero_limit:
        logger.warning("Initial %s estimate has nu_0 = 0; rho uses its limit", initial.method)
    final = (ne.nu0,) + tuple(float(v) for v in rho**2 * np.asarray(ne.components))
    return EblupNeResult(
        initial=initial,
        ne=ne,
        final=VarianceComponents(nu=final),
        rho=tuple(float(v) for v in rho),
        zero_noise_limit=zero_limit,
    )


def blup_ne(design: DesignSet, series: Any, nu: Any, cache: Optional[ProjectionCache] = None) -> np.ndarray:
    """Plug-in BLUP-NE (T*(nu) x)_j^2 for any design, orthogonal or not."""
    if cache is None:
        cache = build_projection(design, series)
    schur = schur_matrices(cache, design, nu)
    return schur.apply_T(cache.x) ** 2


def blup_ne_moments(
    design: DesignSet,
    nu_true: Any,
    estimator: Literal["NE", "BLUPNE"] = "BLUPNE",
    form: Optional[Literal["general", "orthogonal"]] = None,
) -> MomentSummary:
    """Mean, bias, dispersion, covariance and MSE of NE or BLUP-NE at a known nu.

    The general form uses W*^-1 = D U*^-1 (BLUP-NE) or W^-1 (NE); the orthogonal
    form uses rho_j. Dispersion, covariance and MSE assume Gaussian data.

    Raises:
        InvalidParameterError: If nu_true is outside the parametric space
        NotOrthogonalError: If the orthogonal form is requested for another design
    """
    values = validated_nu(nu_true, design.l)
    if form is None:
        form = "orthogonal" if design.is_orthogonal else "general"
    if form == "orthogonal" and not design.is_orthogonal:
        raise NotOrthogonalError("the rho form of the moments needs an orthogonal design")

    nu0, components = float(values[0]), values[1:]
    if form == "orthogonal":
        a = design.column_norms_sq
        if estimator == "BLUPNE":
            rho, _ = shrinkage_factors(values, design)
            bias = -(1.0 - rho) * components
        else:
            bias = nu0 / a
        covariance = np.diag(2.0 * (components + bias) ** 2)
    else:
        if estimator == "BLUPNE":
            inverse = schur_matrices(None, design, values).W_star_inv
            bias = -nu0 * np.diag(inverse)
        else:
            W = project_design(design).W
            inverse = cho_solve(cho_factor(W), np.eye(design.l))
            bias = nu0 * np.diag(inverse)
        covariance = 2.0 * (nu0 * inverse) ** 2
        np.fill_diagonal(covariance, 2.0 * (components + bias) ** 2)

    expectation = components + bias
    dispersion = np.diag(covariance)
    mse = dispersion + bias**2
    return MomentSummary(
        estimator=estimator,
        form=form,
        nu_true=tuple(float(v) for v in values),
        expectation=tuple(float(v) for v in expectation),
        bias=tuple(float(v) for v in bias),
        dispersion=tuple(float(v) for v in dispersion),
        mse=tuple(float(v) for v in mse),
        covariance=tuple(tuple(float(v) for v in row) for row in covariance),
    )
