"""Tests for FdslrmFitter and the benchmark runner."""

import os
import tempfile
from unittest.mock import patch

import numpy as np
import pytest

from fdslrm import FdslrmFitter
from fdslrm.design import realize
from fdslrm.exceptions import DegenerateResidualError, InvalidParameterError, NotOrthogonalError
from fdslrm.fitter import benchmark_model, run_benchmark
from fdslrm.models import RunReport, SimulationConfig, VarianceComponents
from fdslrm.simulate import sample_array

from tests.conftest import draw_series, random_general_spec


@pytest.fixture
def cyber_series(cyber_spec):
    config = SimulationConfig(
        spec=cyber_spec,
        beta=(4.5, 0.4, -0.3),
        nu_true=VarianceComponents(nu=(0.06, 0.024, 0.014)),
        replicates=1,
        seed=2019,
    )
    return sample_array(config)[0]


def test_fitter_initialization(cyber_spec, cyber_series):
    fitter = FdslrmFitter(cyber_spec, cyber_series)
    assert fitter.design.is_orthogonal
    assert not fitter.strict
    np.testing.assert_array_equal(fitter.series, cyber_series)


def test_fit_default_methods(cyber_spec, cyber_series):
    report = FdslrmFitter(cyber_spec, cyber_series).fit()
    assert [item.method for item in report.results] == ["NE", "DOOLSE", "MDOOLSE", "MLE", "REMLE", "EBLUP-NE"]
    assert report.initial == "REMLE"
    assert report.is_orthogonal
    for item in report.results:
        assert len(item.estimate) == 3
        assert item.elapsed_ns is not None and item.elapsed_ns >= 0
    assert report.result("REMLE").loglik is not None


def test_likelihood_rows_equal_nn_rows(cyber_spec, cyber_series):
    """Test MLE equals NN-DOOLSE and REMLE equals NN-MDOOLSE."""
    report = FdslrmFitter(cyber_spec, cyber_series).fit(["nn-doolse", "mle", "nn-mdoolse", "remle"])
    assert report.result("MLE").estimate == report.result("NN-DOOLSE").estimate
    assert report.result("REMLE").estimate == report.result("NN-MDOOLSE").estimate
    assert report.result("REMLE").active_pattern == report.result("NN-MDOOLSE").active_pattern


def test_eblupne_row_and_columns(cyber_spec, cyber_series):
    report = FdslrmFitter(cyber_spec, cyber_series).fit(initial="mle")
    row = report.result("EBLUP-NE")
    assert row.notes == ("initial=MLE",)
    assert row.estimate == report.result("MLE").eblupne_from
    assert row.rho == report.result("MLE").rho
    assert report.result("DOOLSE").eblupne_from is None
    ne = report.result("NE")
    assert row.estimate[0] == ne.estimate[0]
    assert row.eblupne_from_norm is None
    assert report.result("REMLE").eblupne_from_norm == pytest.approx(np.linalg.norm(report.result("REMLE").eblupne_from))


def test_fit_is_deterministic(cyber_spec, cyber_series):
    first = FdslrmFitter(cyber_spec, cyber_series).fit().to_dict(include_timing=False)
    second = FdslrmFitter(cyber_spec, cyber_series).fit().to_dict(include_timing=False)
    assert first == second
    assert all("elapsed_ns" not in item for item in first["results"])
    assert first["schema"] == "fdslrm-report/1"


def test_report_round_trip(cyber_spec, cyber_series):
    data = FdslrmFitter(cyber_spec, cyber_series).fit().to_dict()
    assert RunReport.from_dict(data).to_dict() == data


def test_unknown_method(cyber_spec, cyber_series):
    fitter = FdslrmFitter(cyber_spec, cyber_series)
    with pytest.raises(ValueError, match="Unknown methods"):
        fitter.fit(["ne", "bayes"])
    with pytest.raises(ValueError, match="Unknown method"):
        fitter.eblup_ne("doolse")


def test_non_orthogonal_model(rng):
    spec = random_general_spec(rng, n_range=(30, 50))
    design = realize(spec)
    nu = np.r_[1.0, np.ones(design.l)]
    x = draw_series(rng, design, nu)
    fitter = FdslrmFitter(spec, x, design=design)
    with pytest.raises(NotOrthogonalError, match="--nu"):
        fitter.fit()
    with pytest.raises(NotOrthogonalError):
        fitter.predict()
    blup = fitter.predict(nu=nu.tolist())
    np.testing.assert_allclose(blup.fitted + blup.conditional_residuals, x, atol=1e-10)


def test_predict_at_estimate(cyber_spec, cyber_series):
    fitter = FdslrmFitter(cyber_spec, cyber_series)
    blup = fitter.predict()
    assert tuple(blup.nu) == fitter.remle().estimate
    np.testing.assert_allclose(blup.trend + blup.signal + blup.conditional_residuals, cyber_series, atol=1e-12)
    explicit = fitter.predict(nu=[0.06, 0.024, 0.014])
    assert explicit.y_hat.shape == (2,)


def test_degenerate_series(toy_spec):
    design = realize(toy_spec)
    x = design.F @ np.array([3.0, 0.0, 1.0]) + design.V @ np.array([1.0, -1.0, 2.0, 0.5])
    report = FdslrmFitter(toy_spec, x).fit(["remle", "eblupne"])
    assert report.result("REMLE").degenerate
    assert report.result("REMLE").loglik is None
    assert report.result("EBLUP-NE").degenerate
    with pytest.raises(InvalidParameterError):
        FdslrmFitter(toy_spec, x).predict()
    with pytest.raises(DegenerateResidualError):
        FdslrmFitter(toy_spec, x, strict=True).remle()


def test_degenerate_series_ne_and_projection_rows(toy_spec):
    design = realize(toy_spec)
    x = design.F @ np.array([5.0, 0.0, 0.0]) + design.V @ np.array([1.0, -2.0, 0.5, 1.0])
    report = FdslrmFitter(toy_spec, x).fit(["ne", "doolse", "mdoolse"])
    assert report.result("NE").degenerate
    assert report.result("NE").estimate[0] == 0.0
    assert report.result("DOOLSE").degenerate
    assert report.result("MDOOLSE").degenerate

    fitter = FdslrmFitter(toy_spec, x, strict=True)
    for method in ("ne", "doolse", "mdoolse", "eblupne"):
        with pytest.raises(DegenerateResidualError):
            fitter.fit([method])


def test_from_files_infers_n():
    with tempfile.TemporaryDirectory() as tmpdir:
        data_path = os.path.join(tmpdir, "x.csv")
        model_path = os.path.join(tmpdir, "m.json")
        t = np.arange(1, 13)
        with open(data_path, "w") as f:
            f.write("x\n" + "\n".join(repr(float(v)) for v in 1.0 + np.cos(np.pi * t / 3) + 0.1 * np.sin(t)) + "\n")
        with open(model_path, "w") as f:
            f.write('{"trend": [{"kind": "const"}], "random": [{"kind": "cos", "harmonic": 2}]}')
        fitter = FdslrmFitter.from_files(data_path, model_path)
    assert fitter.spec.n == 12
    assert fitter.ne().method == "NE"


def test_benchmark_model_shape():
    spec = benchmark_model(100, 5)
    assert spec.k == 1
    assert [(term.kind, term.harmonic) for term in spec.random] == [
        ("cos", 1), ("sin", 1), ("cos", 2), ("sin", 2), ("cos", 3)
    ]
    assert realize(spec).is_orthogonal


def test_run_benchmark_slope():
    """Test medians and the log-log slope with a clock that grows linearly in n."""
    grid = [64, 128, 256]
    runs = 3
    ticks = []
    for n in grid:
        ticks += [0, 1000 * n] * runs
    with patch("fdslrm.fitter.time.perf_counter_ns", side_effect=ticks):
        result = run_benchmark(grid, l=2, runs=runs)
    assert [row["median_ns"] for row in result["rows"]] == [64000.0, 128000.0, 256000.0]
    assert result["slope"] == pytest.approx(1.0)
    assert result["l"] == 2


def test_run_benchmark_scaling():
    """Test quadrupling n costs far less than a quadratic method would."""
    result = run_benchmark([2000, 8000], l=4, runs=7)
    small, large = (row["median_ns"] for row in result["rows"])
    assert large / small < 16.0


def test_run_benchmark_linear_growth():
    """Test each doubling of n costs a factor of about two and n = 10^6 stays under 100 ms.

    The grid starts at 125000, where the O(n) projection outweighs the fixed per-call cost.
    """
    result = run_benchmark([125_000, 250_000, 500_000, 1_000_000], l=4, runs=5)
    assert result["threads"] == 1
    assert 1.6 <= 2.0 ** result["slope"] <= 2.6
    assert result["rows"][-1]["median_ns"] < 100e6


def test_run_benchmark_validation():
    with pytest.raises(ValueError):
        run_benchmark([100, 10])
    with pytest.raises(ValueError):
        run_benchmark([10, 100], runs=0)


if __name__ == "__main__":
    pytest.main([__file__])
