"""fdslrm - Variance components estimation for finite discrete spectrum linear regression models."""

from .analysis import dominant_harmonics, periodogram
from .design import DesignSet, evaluate_term, from_matrices, realize
from .eblupne import blup_ne, blup_ne_moments, eblup_ne, initial_estimate, plug_in, shrinkage_factors
from .estimators import (
    KktCertificate,
    d_to_nu,
    dual_objective,
    estimate_mle,
    estimate_ne,
    estimate_nn_doolse,
    estimate_projection_doolse,
    estimate_remle,
    is_degenerate_residual,
    kkt_certificate,
    kkt_inverse,
    kkt_matrix,
    kkt_patterns,
    loglik,
    nu_to_d,
    solve_kkt_system,
)
from .exceptions import (
    DegenerateColumnError,
    DegenerateResidualError,
    FdslrmError,
    InputError,
    InvalidParameterError,
    KktSearchError,
    ModelError,
    NonPositiveDefiniteError,
    NotOrthogonalError,
    RankDeficientError,
)
from .export import export_to_file, log_series, read_model_json, read_series_csv, to_json
from .fitter import FdslrmFitter, run_benchmark
from .mme import BlupResult, predictor_identities, solve_mme
from .models import (
    DualVariables,
    EblupNeResult,
    EstimationResult,
    KktSolution,
    PredictorIdentityResiduals,
    LikelihoodSolution,
    ModelSpec,
    MomentSummary,
    PeriodogramOrdinate,
    ProjectionEstimate,
    RunReport,
    SimulationConfig,
    TermSpec,
    VarianceComponents,
)
from .projection import (
    GramSystem,
    ProjectionCache,
    SchurMatrices,
    build_projection,
    gram_system,
    schur_determinant_identity,
    schur_matrices,
)
from .simulate import Replicate, sample, sample_array, summarize
from .version import __version__

__all__ = [
    "FdslrmFitter",
    "run_benchmark",
    "TermSpec",
    "ModelSpec",
    "DesignSet",
    "realize",
    "from_matrices",
    "evaluate_term",
    "periodogram",
    "dominant_harmonics",
    "ProjectionCache",
    "GramSystem",
    "SchurMatrices",
    "build_projection",
    "gram_system",
    "schur_matrices",
    "schur_determinant_identity",
    "BlupResult",
    "solve_mme",
    "predictor_identities",
    "PredictorIdentityResiduals",
    "VarianceComponents",
    "DualVariables",
    "ProjectionEstimate",
    "KktSolution",
    "KktCertificate",
    "LikelihoodSolution",
    "EstimationResult",
    "estimate_ne",
    "estimate_projection_doolse",
    "estimate_nn_doolse",
    "estimate_remle",
    "estimate_mle",
    "is_degenerate_residual",
    "kkt_patterns",
    "kkt_matrix",
    "kkt_inverse",
    "solve_kkt_system",
    "kkt_certificate",
    "loglik",
    "nu_to_d",
    "d_to_nu",
    "dual_objective",
    "EblupNeResult",
    "MomentSummary",
    "eblup_ne",
    "plug_in",
    "initial_estimate",
    "shrinkage_factors",
    "blup_ne",
    "blup_ne_moments",
    "SimulationConfig",
    "Replicate",
    "sample",
    "sample_array",
    "summarize",
    "PeriodogramOrdinate",
    "RunReport",
    "log_series",
    "read_series_csv",
    "read_model_json",
    "to_json",
    "export_to_file",
    "FdslrmError",
    "InputError",
    "ModelError",
    "RankDeficientError",
    "DegenerateColumnError",
    "NotOrthogonalError",
    "InvalidParameterError",
    "NonPositiveDefiniteError",
    "DegenerateResidualError",
    "KktSearchError",
    "__version__",
]
