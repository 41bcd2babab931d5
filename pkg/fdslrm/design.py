"""Realization of FDSLRM design matrices over the time domain t = 1..n."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import DEGENERATE_COLUMN_ATOL, ORTHOGONALITY_RTOL, RANK_RTOL
from .exceptions import DegenerateColumnError, RankDeficientError
from .models import ModelSpec, TermSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DesignSet:
    """Realized design: F (n x k), V (n x l), orthogonality flag and ||v_j||^2.

    Arrays are made read-only on construction.
    """

    F: np.ndarray
    V: np.ndarray
    is_orthogonal: bool
    column_norms_sq: np.ndarray
    spec: Optional[ModelSpec] = None

    def __post_init__(self) -> None:
        for array in (self.F, self.V, self.column_norms_sq):
            array.setflags(write=False)

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def k(self) -> int:
        return self.F.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.V.shape[1]

    @property
    def column_norms_fourth(self) -> np.ndarray:
        return self.column_norms_sq**2

    def covariance(self, nu: Sequence[float]) -> np.ndarray:
        """Dense Sigma = nu_0 I + V D V'. Only meant for small n."""
        values = np.asarray(nu, dtype=float)
        return values[0] * np.eye(self.n) + (self.V * values[1:]) @ self.V.T


def evaluate_term(term: TermSpec, n: int) -> np.ndarray:
    """Evaluate one term at t = 1..n.

    Harmonic angles are reduced modulo n in integer arithmetic before scaling, so
    the Fourier columns are exact up to one rounding of the angle.
    """
    t = np.arange(1, n + 1)
    if term.kind == "const":
        return np.ones(n)
    if term.kind == "poly":
        return t.astype(float) ** int(term.power or 0)
    if term.harmonic is not None:
        angle = 2.0 * np.pi * ((term.harmonic * t) % n) / n
    else:
        angle = float(term.frequency) * t  # type: ignore[arg-type]
    return np.cos(angle) if term.kind == "cos" else np.sin(angle)


def _columns(terms: Sequence[TermSpec], n: int) -> np.ndarray:
    if not terms:
        return np.zeros((n, 0))
    return np.column_stack([evaluate_term(term, n) for term in terms])


def is_structurally_orthogonal(spec: ModelSpec) -> bool:
    """True when every term is a distinct discrete Fourier basis vector."""
    keys: List[Optional[Tuple[str, int]]] = [term.fourier_key() for term in spec.trend + spec.random]
    if any(key is None for key in keys):
        return False
    return len(set(keys)) == len(keys)


def check_orthogonality(F: np.ndarray, V: np.ndarray, rtol: float = ORTHOGONALITY_RTOL) -> bool:
    """Numerical test of F'V = 0 and V'V diagonal, scaled by the column norms."""
    f_norms = np.linalg.norm(F, axis=0)
    v_norms = np.linalg.norm(V, axis=0)
    cross = np.abs(F.T @ V)
    if cross.size and np.any(cross > rtol * np.outer(f_norms, v_norms)):
        return False
    gram = np.abs(V.T @ V)
    np.fill_diagonal(gram, 0.0)
    return not np.any(gram > rtol * np.outer(v_norms, v_norms))


def check_rank(X: np.ndarray, rtol: float = RANK_RTOL) -> None:
    """Raise RankDeficientError when sigma_min / sigma_max of X falls below rtol."""
    if X.shape[1] == 0:
        return
    singular = np.linalg.svd(X, compute_uv=False)
    if singular[0] == 0 or singular[-1] / singular[0] < rtol:
        ratio = 0.0 if singular[0] == 0 else singular[-1] / singular[0]
        raise RankDeficientError(
            f"rank(F V) < k + l = {X.shape[1]} (sigma_min/sigma_max = {ratio:.3e})"
        )


def realize(spec: ModelSpec) -> DesignSet:
    """Realize the design matrices of an FDSLRM.

    Args:
        spec: Symbolic model

    Returns:
        DesignSet with F, V, the orthogonality flag and column norms

    Raises:
        DegenerateColumnError: If some ||v_j||^2 is numerically zero
        RankDeficientError: If (F V) does not have full column rank
    """
    n = spec.n
    F = _columns(spec.trend, n)
    V = _columns(spec.random, n)

    norms_sq = np.einsum("ij,ij->j", V, V)
    for j, value in enumerate(norms_sq):
        if value <= DEGENERATE_COLUMN_ATOL * n:
            raise DegenerateColumnError(f"random component v_{j + 1} is numerically zero on t = 1..{n}")

    check_rank(np.hstack([F, V]))

    if is_structurally_orthogonal(spec):
        orthogonal = True
    else:
        orthogonal = check_orthogonality(F, V)

    logger.debug("Realized design n=%d k=%d l=%d orthogonal=%s", n, spec.k, spec.l, orthogonal)
    return DesignSet(F=F, V=V, is_orthogonal=orthogonal, column_norms_sq=norms_sq, spec=spec)


def from_matrices(F: np.ndarray, V: np.ndarray) -> DesignSet:
    """Wrap explicit design matrices, running the same checks as ``realize``."""
    F = np.array(F, dtype=float, ndmin=2)
    V = np.array(V, dtype=float, ndmin=2)
    if F.shape[0] != V.shape[0]:
        raise ValueError(f"F has {F.shape[0]} rows but V has {V.shape[0]}")
    n = F.shape[0]
    if n <= F.shape[1] + V.shape[1]:
        raise ValueError(f"need n > k + l, got n={n}, k={F.shape[1]}, l={V.shape[1]}")
    norms_sq = np.einsum("ij,ij->j", V, V)
    if np.any(norms_sq <= DEGENERATE_COLUMN_ATOL * n):
        raise DegenerateColumnError("some random component column is numerically zero")
    check_rank(np.hstack([F, V]))
    return DesignSet(F=F, V=V, is_orthogonal=check_orthogonality(F, V), column_norms_sq=norms_sq)
