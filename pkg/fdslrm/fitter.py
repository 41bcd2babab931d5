"""High-level fitting of an FDSLRM to one observed series."""

import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from threadpoolctl import threadpool_limits

from .config import DEFAULT_INITIAL, DEFAULT_METHODS
from .design import DesignSet, realize
from .eblupne import initial_estimate, plug_in
from .estimators import (
    estimate_ne,
    estimate_nn_doolse,
    estimate_projection_doolse,
    is_degenerate_residual,
)
from .exceptions import DegenerateResidualError, InvalidParameterError, NotOrthogonalError
from .export import log_series, read_model_json, read_series_csv
from .mme import BlupResult, solve_mme
from .models import EblupNeResult, EstimationResult, ModelSpec, RunReport, VarianceComponents
from .projection import build_projection, gram_system, project_design

logger = logging.getLogger(__name__)

T = TypeVar("T")


class FdslrmFitter:
    """Estimate variance components, EBLUP-NE and BLUP decompositions for one series.

    The design and the OLS projection of the series are computed once and shared by
    every estimator.

    Attributes:
        spec (ModelSpec): Model being fitted
        design (DesignSet): Realized design matrices
        strict (bool): Raise DegenerateResidualError instead of flagging it
    """

    METHOD_LABELS = {
        "ne": "NE",
        "doolse": "DOOLSE",
        "mdoolse": "MDOOLSE",
        "nn-doolse": "NN-DOOLSE",
        "nn-mdoolse": "NN-MDOOLSE",
        "mle": "MLE",
        "remle": "REMLE",
        "eblupne": "EBLUP-NE",
    }
    STAGE_ONE = ("ne", "nn-doolse", "nn-mdoolse", "mle", "remle")

    def __init__(
        self,
        spec: ModelSpec,
        series: Any,
        strict: bool = False,
        design: Optional[DesignSet] = None,
    ):
        """Initialize the fitter.

        Args:
            spec: Model specification
            series: Observations x(1), ..., x(n)
            strict: Treat a residual in span(V) as an error (default: False)
            design: Realized design of ``spec``, reused when given
        """
        self.spec = spec
        self.design = design if design is not None else realize(spec)
        self.cache = build_projection(self.design, series, project_design(self.design))
        self.strict = strict

    @classmethod
    def from_files(
        cls, data_path: str, model_path: str, strict: bool = False, log: bool = False
    ) -> "FdslrmFitter":
        """Create a fitter from a series CSV and a model JSON (n inferred when absent).

        With ``log`` the model is fitted to the natural log of the series.
        """
        series = read_series_csv(data_path)
        if log:
            series = log_series(series)
        spec = read_model_json(model_path, n=series.size)
        return cls(spec, series, strict=strict)

    @property
    def series(self) -> np.ndarray:
        return self.cache.x

    def _require_orthogonal(self, what: str) -> None:
        if not self.design.is_orthogonal:
            raise NotOrthogonalError(
                f"{what} needs an orthogonal design (F'V = 0 and V'V diagonal); this model is not. "
                "Use distinct Fourier harmonics, or run 'predict' with an explicit --nu."
            )

    def _timed(self, func: Callable[[], T]) -> Tuple[T, int]:
        start = time.perf_counter_ns()
        result = func()
        return result, time.perf_counter_ns() - start

    def ne(self) -> EstimationResult:
        """Natural estimators."""
        self._require_orthogonal("NE")
        result, elapsed = self._timed(lambda: initial_estimate(self.cache, self.design, "NE", strict=self.strict))
        return result.model_copy(update={"elapsed_ns": elapsed})

    def projection(self, variant: str = "MDOOLSE") -> EstimationResult:
        """Unconstrained projection (M)DOOLSE; negative entries are flagged, not clamped.

        Raises:
            DegenerateResidualError: If strict and the OLS residual lies in span(V)
        """
        self._require_orthogonal(variant)
        degenerate = is_degenerate_residual(self.cache, self.design)
        if degenerate and self.strict:
            raise DegenerateResidualError(f"{variant}: OLS residual in span(V)")

        def run() -> Any:
            return estimate_projection_doolse(gram_system(self.cache, self.design, variant))  # type: ignore[arg-type]

        estimate, elapsed = self._timed(run)
        notes = []
        if estimate.has_negative:
            notes.append("estimate outside the parametric space")
        if degenerate:
            notes.append("OLS residual in span(V)")
        return EstimationResult(
            method=variant,
            estimate=estimate.values,
            nonnegative=not estimate.has_negative,
            degenerate=degenerate,
            notes=tuple(notes),
            elapsed_ns=elapsed,
        )

    def nn_doolse(self, variant: str = "MDOOLSE") -> EstimationResult:
        """Nonnegative (M)DOOLSE by the KKT algorithm."""
        return self._stage_one(f"NN-{variant}")

    def mle(self) -> EstimationResult:
        return self._stage_one("MLE")

    def remle(self) -> EstimationResult:
        return self._stage_one("REMLE")

    def _stage_one(self, method: str) -> EstimationResult:
        self._require_orthogonal(method)
        result, elapsed = self._timed(
            lambda: initial_estimate(self.cache, self.design, method, strict=self.strict)
        )
        logger.info("%s finished in %.3f ms", method, elapsed / 1e6)
        return result.model_copy(update={"elapsed_ns": elapsed})

    def eblup_ne(self, initial: str = DEFAULT_INITIAL) -> EblupNeResult:
        """Two-stage EBLUP-NE with the given stage-1 method."""
        stage_one = self._stage_one(self._label(initial))
        return plug_in(stage_one, estimate_ne(self.cache, self.design), self.design)

    def predict(self, nu: Optional[Sequence[float]] = None, method: Optional[str] = None) -> BlupResult:
        """BLUE and BLUP decomposition at a given nu or at a stage-1 estimate.

        Args:
            nu: Variance components to plug in
            method: Stage-1 method used when ``nu`` is not given (default: remle)

        Returns:
            BlupResult

        Raises:
            InvalidParameterError: If the estimate has nu_0 = 0
        """
        if nu is None:
            label = self._label(method or DEFAULT_INITIAL)
            estimate = self._stage_one(label)
            if estimate.degenerate:
                raise InvalidParameterError(
                    f"{label} has nu_0 = 0 (residual in span(V)); the BLUP needs nu_0 > 0"
                )
            nu = estimate.estimate
        return solve_mme(self.design, self.series, nu, cache=self.cache)

    def _label(self, method: str) -> str:
        key = method.lower()
        if key not in self.STAGE_ONE:
            raise ValueError(
                f"Unknown method: {method}. Use one of {', '.join(self.STAGE_ONE)}"
            )
        return self.METHOD_LABELS[key]

    def _with_eblupne(self, result: EstimationResult, ne: VarianceComponents) -> EstimationResult:
        plugged = plug_in(result, ne, self.design)
        return result.model_copy(update={"eblupne_from": plugged.final.nu, "rho": plugged.rho})

    def fit(
        self, methods: Sequence[str] = DEFAULT_METHODS, initial: str = DEFAULT_INITIAL
    ) -> RunReport:
        """Run the requested estimators and assemble a report.

        Every stage-1 row also carries the EBLUP-NE computed from it.

        Args:
            methods: Any of ne, doolse, mdoolse, nn-doolse, nn-mdoolse, mle, remle, eblupne
            initial: Stage-1 method of the eblupne row (default: remle)

        Returns:
            RunReport

        Raises:
            NotOrthogonalError: If the design is not orthogonal
            ValueError: If a method name is unknown
        """
        self._require_orthogonal("fit")
        unknown = [m for m in methods if m.lower() not in self.METHOD_LABELS]
        if unknown:
            raise ValueError(f"Unknown methods: {', '.join(unknown)}")

        ne = estimate_ne(self.cache, self.design)
        results: List[EstimationResult] = []
        for method in methods:
            key = method.lower()
            if key == "ne":
                results.append(self._with_eblupne(self.ne(), ne))
            elif key in ("doolse", "mdoolse"):
                results.append(self.projection(self.METHOD_LABELS[key]))
            elif key in self.STAGE_ONE:
                results.append(self._with_eblupne(self._stage_one(self.METHOD_LABELS[key]), ne))
            else:
                combined, elapsed = self._timed(lambda: self.eblup_ne(initial))
                results.append(
                    EstimationResult(
                        method="EBLUP-NE",
                        estimate=combined.final.nu,
                        rho=combined.rho,
                        degenerate=combined.initial.degenerate,
                        notes=(f"initial={combined.initial.method}",),
                        elapsed_ns=elapsed,
                    )
                )
        return RunReport(
            model=self.spec,
            is_orthogonal=self.design.is_orthogonal,
            initial=self._label(initial),
            results=results,
        )


def benchmark_model(n: int, l: int) -> ModelSpec:  # noqa: E741
    """Orthogonal benchmark model: constant trend, l Fourier terms at harmonics 1, 1, 2, 2, ..."""
    random = []
    for j in range(l):
        harmonic = j // 2 + 1
        random.append({"kind": "cos" if j % 2 == 0 else "sin", "harmonic": harmonic})
    return ModelSpec.from_dict({"n": n, "trend": [{"kind": "const"}], "random": random})


def run_benchmark(
    n_grid: Sequence[int],
    l: int = 4,  # noqa: E741
    seed: int = 0,
    runs: int = 11,
    threads: Optional[int] = 1,
) -> Dict[str, Any]:
    """Median wall time of NN-MDOOLSE, including projection and Gram assembly, per n.

    Args:
        n_grid: Ascending observation counts
        l: Number of random components
        seed: Seed of the benchmark series
        runs: Timed runs per n
        threads: BLAS thread limit during timing; None leaves the pools alone

    Returns:
        Dictionary with one row per n and the slope of log(time) against log(n)
    """
    if list(n_grid) != sorted(n_grid):
        raise ValueError("n grid must be ascending")
    if runs < 1:
        raise ValueError("runs must be positive")

    with threadpool_limits(limits=threads):
        result = _time_grid(n_grid, l, seed, runs)
    result["threads"] = threads
    return result


def _time_grid(n_grid: Sequence[int], l: int, seed: int, runs: int) -> Dict[str, Any]:  # noqa: E741
    rows = []
    for n in n_grid:
        design = realize(benchmark_model(int(n), l))
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(n),))))
        x = design.V @ rng.standard_normal(l) + rng.standard_normal(design.n)
        timings = []
        for _ in range(runs):
            start = time.perf_counter_ns()
            cache = build_projection(design, x)
            gram = gram_system(cache, design, "MDOOLSE")
            try:
                estimate_nn_doolse(gram)
            except DegenerateResidualError:
                pass
            timings.append(time.perf_counter_ns() - start)
        median = float(np.median(timings))
        logger.info("bench n=%d median=%.3f ms", n, median / 1e6)
        rows.append({"n": int(n), "median_ns": median, "runs": runs})

    slope = None
    if len(rows) > 1:
        logs = np.log([[row["n"], row["median_ns"]] for row in rows])
        slope = float(np.polyfit(logs[:, 0], logs[:, 1], 1)[0])
    return {"l": l, "seed": seed, "rows": rows, "slope": slope}
