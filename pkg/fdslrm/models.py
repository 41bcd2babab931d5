"""Data models for FDSLRM specifications, estimates and reports."""

import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from .config import REPORT_SCHEMA
from .version import __version__

TermKind = Literal["const", "cos", "sin", "poly"]
GramVariant = Literal["DOOLSE", "MDOOLSE"]
LikelihoodVariant = Literal["ML", "REML"]


class TermSpec(BaseModel):
    """One trend function f_i or random-component function v_j on t = 1..n.

    Cosine and sine terms give either an integer ``harmonic`` h (frequency 2*pi*h/n,
    resolved against the model's n) or a raw ``frequency`` in radians per step.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: TermKind
    harmonic: Optional[int] = None
    frequency: Optional[float] = None
    power: Optional[int] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "TermSpec":
        if self.kind in ("cos", "sin"):
            if (self.harmonic is None) == (self.frequency is None):
                raise ValueError(f"{self.kind} term needs exactly one of 'harmonic' or 'frequency'")
            if self.power is not None:
                raise ValueError(f"{self.kind} term does not take 'power'")
            if self.harmonic is not None and self.harmonic < 1:
                raise ValueError("harmonic must be a positive integer")
            if self.frequency is not None:
                upper_ok = self.frequency <= math.pi if self.kind == "cos" else self.frequency < math.pi
                if not (self.frequency > 0 and upper_ok):
                    interval = "(0, pi]" if self.kind == "cos" else "(0, pi)"
                    raise ValueError(f"{self.kind} frequency must lie in {interval}")
        elif self.kind == "poly":
            if self.power is None or self.power < 0:
                raise ValueError("poly term needs a nonnegative 'power'")
            if self.harmonic is not None or self.frequency is not None:
                raise ValueError("poly term takes only 'power'")
        else:
            if self.harmonic is not None or self.frequency is not None or self.power is not None:
                raise ValueError("const term takes no parameters")
        return self

    @classmethod
    def const(cls) -> "TermSpec":
        return cls(kind="const")

    @classmethod
    def cos(cls, harmonic: int) -> "TermSpec":
        return cls(kind="cos", harmonic=harmonic)

    @classmethod
    def sin(cls, harmonic: int) -> "TermSpec":
        return cls(kind="sin", harmonic=harmonic)

    @classmethod
    def poly(cls, power: int) -> "TermSpec":
        return cls(kind="poly", power=power)

    def angular_frequency(self, n: int) -> Optional[float]:
        """Frequency in radians per step, or None for const/poly terms."""
        if self.kind not in ("cos", "sin"):
            return None
        if self.harmonic is not None:
            return 2.0 * math.pi * self.harmonic / n
        return self.frequency

    def fourier_key(self) -> Optional[Tuple[str, int]]:
        """Identify the discrete Fourier basis vector this term realizes.

        Returns None for terms that are not exact Fourier vectors (poly of positive power,
        raw frequencies); const maps to the zero-frequency cosine.
        """
        if self.kind == "const" or (self.kind == "poly" and self.power == 0):
            return ("cos", 0)
        if self.kind in ("cos", "sin") and self.harmonic is not None:
            return (self.kind, self.harmonic)
        return None


class ModelSpec(BaseModel):
    """Symbolic FDSLRM: observation count, trend terms and random-component terms."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int
    trend: Tuple[TermSpec, ...] = ()
    random: Tuple[TermSpec, ...] = ()

    @model_validator(mode="after")
    def _check_identifiable(self) -> "ModelSpec":
        if self.n <= self.k + self.l:
            raise ValueError(f"need n > k + l, got n={self.n}, k={self.k}, l={self.l}")
        for term in self.trend + self.random:
            if term.harmonic is None:
                continue
            # sin at h = n/2 is identically zero on integer t
            if term.kind == "cos" and 2 * term.harmonic > self.n:
                raise ValueError(f"cos harmonic {term.harmonic} exceeds n/2 for n={self.n}")
            if term.kind == "sin" and 2 * term.harmonic >= self.n:
                raise ValueError(f"sin harmonic {term.harmonic} must be below n/2 for n={self.n}")
        return self

    @property
    def k(self) -> int:
        return len(self.trend)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.random)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], n: Optional[int] = None) -> "ModelSpec":
        """Create a ModelSpec from a config dictionary.

        Args:
            data: Dictionary with "n", "trend" and "random" keys
            n: Observation count used when the dictionary has no "n"

        Returns:
            ModelSpec instance
        """
        payload = dict(data)
        if payload.get("n") is None:
            if n is None:
                raise ValueError("model config has no 'n' and none was inferred")
            payload["n"] = n
        return cls.model_validate(payload)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)


class VarianceComponents(BaseModel):
    """Variance parameters nu = (nu_0, nu_1, ..., nu_l) on the closed space [0, inf)^(l+1).

    ``is_admissible`` tells whether nu_0 > 0, i.e. nu belongs to the parametric space
    of the model; nu_0 = 0 only appears in flagged degenerate estimates.
    """
    model_config = ConfigDict(frozen=True)

    nu: Tuple[float, ...]

    @field_validator("nu")
    @classmethod
    def _check_nu(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(value) < 1:
            raise ValueError("nu needs at least the white-noise variance nu_0")
        if not all(math.isfinite(v) for v in value):
            raise ValueError("nu must be finite")
        if any(v < 0 for v in value):
            raise ValueError(f"variance components must be nonnegative, got {value}")
        return value

    @classmethod
    def from_array(cls, values: Any) -> "VarianceComponents":
        return cls(nu=tuple(float(v) for v in np.asarray(values, dtype=float).ravel()))

    @property
    def nu0(self) -> float:
        return self.nu[0]

    @property
    def components(self) -> Tuple[float, ...]:
        return self.nu[1:]

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.nu) - 1

    @property
    def is_admissible(self) -> bool:
        return self.nu[0] > 0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.nu))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.nu, dtype=float)


class DualVariables(BaseModel):
    """Reparameterization d = (d_0, ..., d_l) in which (RE)ML becomes convex."""
    model_config = ConfigDict(frozen=True)

    d: Tuple[float, ...]

    @field_validator("d")
    @classmethod
    def _check_d(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(value) < 1 or value[0] <= 0:
            raise ValueError("d_0 must be positive")
        if any(v < 0 for v in value[1:]):
            raise ValueError("d_j must be nonnegative")
        return value

    def as_array(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)


class ProjectionEstimate(BaseModel):
    """Unconstrained (M)DOOLSE G^-1 q; may leave the parametric space."""
    model_config = ConfigDict(frozen=True)

    variant: GramVariant
    values: Tuple[float, ...]
    has_negative: bool

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


class KktSolution(BaseModel):
    """NN-(M)DOOLSE solution together with its KKT certificate data."""
    model_config = ConfigDict(frozen=True)

    variant: GramVariant
    nu_hat: VarianceComponents
    active_pattern: Tuple[int, ...]
    systems_tried: int
    lagrange: Tuple[float, ...]
    n_star: float
    degenerate: bool = False
    boundary_ties: Tuple[int, ...] = ()


class LikelihoodSolution(BaseModel):
    """(RE)MLE obtained through NN-(M)DOOLSE, with the log-likelihood at the estimate."""
    model_config = ConfigDict(frozen=True)

    variant: LikelihoodVariant
    solution: KktSolution
    loglik: Optional[float] = None
    exists: bool = True

    @property
    def nu_hat(self) -> VarianceComponents:
        return self.solution.nu_hat


class PredictorIdentityResiduals(BaseModel):
    """Max-abs residuals of the three T* identities."""
    product: float
    projection: float
    covariance: float

    @property
    def max(self) -> float:
        return max(self.product, self.projection, self.covariance)


class EstimationResult(BaseModel):
    """One row of a run report: a labelled estimate plus diagnostics."""
    model_config = ConfigDict(frozen=True)

    method: str
    estimate: Tuple[float, ...]
    nonnegative: bool = True
    degenerate: bool = False
    active_pattern: Optional[Tuple[int, ...]] = None
    systems_tried: Optional[int] = None
    lagrange: Optional[Tuple[float, ...]] = None
    loglik: Optional[float] = None
    eblupne_from: Optional[Tuple[float, ...]] = None
    rho: Optional[Tuple[float, ...]] = None
    notes: Tuple[str, ...] = ()
    elapsed_ns: Optional[int] = None

    @computed_field  # type: ignore[prop-decorator]
    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.estimate))

    @computed_field  # type: ignore[prop-decorator]
    @property
    def eblupne_from_norm(self) -> Optional[float]:
        if self.eblupne_from is None:
            return None
        return float(np.linalg.norm(self.eblupne_from))


class EblupNeResult(BaseModel):
    """Two-stage EBLUP-NE: stage-1 estimate, NE, shrinkage factors and final estimate."""
    model_config = ConfigDict(frozen=True)

    initial: EstimationResult
    ne: VarianceComponents
    final: VarianceComponents
    rho: Tuple[float, ...]
    zero_noise_limit: bool = False


class MomentSummary(BaseModel):
    """Exact moments of NE or BLUP-NE of nu_1..nu_l at a known true nu."""
    model_config = ConfigDict(frozen=True)

    estimator: Literal["NE", "BLUPNE"]
    form: Literal["general", "orthogonal"]
    nu_true: Tuple[float, ...]
    expectation: Tuple[float, ...]
    bias: Tuple[float, ...]
    dispersion: Tuple[float, ...]
    mse: Tuple[float, ...]
    covariance: Tuple[Tuple[float, ...], ...]
    # moments hold at the true nu; plug-in (empirical) moments are not claimed
    at_known_parameters: bool = True


class PeriodogramOrdinate(BaseModel):
    """Periodogram value at the Fourier frequency 2*pi*h/n."""
    model_config = ConfigDict(frozen=True)

    harmonic: int
    frequency: float
    power: float


class SimulationConfig(BaseModel):
    """Gaussian FDSLRM sampler configuration."""
    model_config = ConfigDict(frozen=True)

    spec: ModelSpec
    beta: Tuple[float, ...]
    nu_true: VarianceComponents
    replicates: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_shapes(self) -> "SimulationConfig":
        if len(self.beta) != self.spec.k:
            raise ValueError(f"beta has {len(self.beta)} entries, model has k={self.spec.k}")
        if self.nu_true.l != self.spec.l:
            raise ValueError(f"nu_true has {self.nu_true.l + 1} entries, model needs {self.spec.l + 1}")
        if not self.nu_true.is_admissible:
            raise ValueError("nu_true needs nu_0 > 0")
        return self


class RunReport(BaseModel):
    """JSON report of one fit run."""
    model_config = ConfigDict(populate_by_name=True)

    schema_id: str = Field(default=REPORT_SCHEMA, alias="schema")
    version: str = __version__
    model: ModelSpec
    is_orthogonal: bool
    initial: Optional[str] = None
    results: List[EstimationResult] = Field(default_factory=list)

    def result(self, method: str) -> EstimationResult:
        for item in self.results:
            if item.method == method:
                return item
        raise KeyError(method)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data = self.model_dump(mode="json", by_alias=True, exclude_none=True)
        data["model"] = self.model.to_dict()
        if not include_timing:
            for item in data["results"]:
                item.pop("elapsed_ns", None)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunReport":
        return cls.model_validate(data)
