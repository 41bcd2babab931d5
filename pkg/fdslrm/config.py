"""Numerical tolerances and runtime configuration."""

import os
from typing import Optional

# rank(F V) is declared deficient when sigma_min / sigma_max falls below this
RANK_RTOL = 1e-10
# off-diagonal entries of F'V, V'V relative to the column norms
ORTHOGONALITY_RTOL = 1e-10
# nu_j < EFFECTIVE_ZERO_RTOL * max(nu) is treated as an exact zero
EFFECTIVE_ZERO_RTOL = 1e-14
# g >= -KKT_ACCEPT_RTOL * max(1, |q|_inf) passes the nonnegativity test
KKT_ACCEPT_RTOL = 1e-12
# eps in span(V) when the Bessel defect is below BESSEL_DEFECT_RTOL * eps'eps
BESSEL_DEFECT_RTOL = 1e-12
# |v_j|^2 <= DEGENERATE_COLUMN_ATOL * n rejects the column
DEGENERATE_COLUMN_ATOL = 1e-12

REPORT_SCHEMA = "fdslrm-report/1"
SEED_ENV_VAR = "FDSLRM_SEED"
DATA_DIR_ENV_VAR = "FDSLRM_DATA_DIR"

DEFAULT_METHODS = ("ne", "doolse", "mdoolse", "mle", "remle", "eblupne")
DEFAULT_INITIAL = "remle"


def resolve_seed(seed: Optional[int] = None) -> int:
    """Return the seed from FDSLRM_SEED if set, else the configured one.

    Args:
        seed: Seed from the command line or a config file

    Returns:
        Effective seed (0 when neither is given)
    """
    env_value = os.environ.get(SEED_ENV_VAR)
    if env_value is not None and env_value.strip():
        return int(env_value)
    return 0 if seed is None else int(seed)
