"""Tests for the Gaussian sampler."""

import numpy as np
import pytest
from pydantic import ValidationError

from fdslrm.design import realize
from fdslrm.models import ModelSpec, SimulationConfig, TermSpec, VarianceComponents
from fdslrm.simulate import BIT_GENERATOR, draw_replicate, sample, sample_array, summarize


@pytest.fixture
def small_spec():
    return ModelSpec(n=8, trend=(TermSpec.const(),), random=(TermSpec.cos(1), TermSpec.sin(1)))


def make_config(spec, nu, beta=None, replicates=10, seed=0):
    if beta is None:
        beta = (0.0,) * spec.k
    return SimulationConfig(
        spec=spec,
        beta=tuple(beta),
        nu_true=VarianceComponents(nu=tuple(nu)),
        replicates=replicates,
        seed=seed,
    )


def test_same_seed_same_draws(small_spec):
    config = make_config(small_spec, (1.0, 2.0, 0.5), beta=(3.0,), replicates=5, seed=42)
    np.testing.assert_array_equal(sample_array(config), sample_array(config))


def test_different_seeds_differ(small_spec):
    first = sample_array(make_config(small_spec, (1.0, 2.0, 0.5), seed=1))
    second = sample_array(make_config(small_spec, (1.0, 2.0, 0.5), seed=2))
    assert not np.array_equal(first, second)


def test_replicate_does_not_depend_on_run_length(small_spec):
    """Test replicate i is the same whether 3 or 30 replicates are drawn."""
    short = sample_array(make_config(small_spec, (1.0, 2.0, 0.5), replicates=3, seed=9))
    long = sample_array(make_config(small_spec, (1.0, 2.0, 0.5), replicates=30, seed=9))
    np.testing.assert_array_equal(short, long[:3])
    design = realize(small_spec)
    config = make_config(small_spec, (1.0, 2.0, 0.5), replicates=30, seed=9)
    np.testing.assert_array_equal(draw_replicate(config, design, 17).x, long[17])


def test_replicate_parts_add_up(small_spec):
    design = realize(small_spec)
    config = make_config(small_spec, (1.0, 2.0, 0.0), beta=(4.0,), replicates=3, seed=5)
    for replicate in sample(config, design):
        np.testing.assert_allclose(replicate.x, design.F @ [4.0] + design.V @ replicate.y + replicate.w)
        assert replicate.y[1] == 0.0


def test_white_noise_covariance(small_spec):
    """Test nu = (nu_0, 0, 0) gives covariance nu_0 I."""
    X = sample_array(make_config(small_spec, (2.0, 0.0, 0.0), replicates=20_000, seed=3))
    cov = np.cov(X.T)
    se = 2.0 * np.sqrt(2.0 / X.shape[0])
    assert np.all(np.abs(np.diag(cov) - 2.0) < 4.0 * se)
    off = cov[~np.eye(8, dtype=bool)]
    assert np.all(np.abs(off) < 4.0 * 2.0 / np.sqrt(X.shape[0]))


def test_sample_mean_is_trend(toy_spec):
    beta = (10.0, 2.0, -1.0)
    nu = (0.5, 1.0, 1.0, 2.0, 0.0)
    design = realize(toy_spec)
    X = sample_array(make_config(toy_spec, nu, beta=beta, replicates=20_000, seed=4), design)
    sigma = design.covariance(nu)
    se = np.sqrt(np.diag(sigma) / X.shape[0])
    assert np.all(np.abs(X.mean(axis=0) - design.F @ np.asarray(beta)) < 4.0 * se)


def test_full_covariance(toy_spec):
    """Test the empirical covariance matches nu_0 I + V D V' entrywise within 5 SE."""
    nu = (0.5, 1.0, 0.3, 2.0, 0.0)
    design = realize(toy_spec)
    X = sample_array(make_config(toy_spec, nu, beta=(1.0, 0.0, 0.0), replicates=100_000, seed=12), design)
    sigma = design.covariance(nu)
    replicates = X.shape[0]
    se = np.sqrt((sigma**2 + np.outer(np.diag(sigma), np.diag(sigma))) / replicates)
    assert np.all(np.abs(np.cov(X.T) - sigma) < 5.0 * se + 1e-12)


def test_summarize(toy_spec):
    nu = (0.5, 1.0, 0.3, 2.0, 0.0)
    config = make_config(toy_spec, nu, beta=(1.0, 0.5, 0.0), replicates=2000, seed=8)
    design = realize(toy_spec)
    summary = summarize(config, design)
    X = sample_array(config, design)
    assert summary["replicates"] == 2000
    np.testing.assert_allclose(summary["mean"], X.mean(axis=0), rtol=1e-9, atol=1e-10)
    np.testing.assert_allclose(summary["variance"], X.var(axis=0, ddof=1), rtol=1e-9)
    np.testing.assert_allclose(summary["expected_variance"], np.diag(design.covariance(nu)))
    assert summary["generator"]["bit_generator"] == BIT_GENERATOR


def test_config_validation(small_spec):
    with pytest.raises(ValidationError):
        make_config(small_spec, (1.0, 1.0, 1.0), beta=(1.0, 2.0))
    with pytest.raises(ValidationError):
        make_config(small_spec, (1.0, 1.0))
    with pytest.raises(ValidationError):
        make_config(small_spec, (0.0, 1.0, 1.0))
    with pytest.raises(ValidationError):
        make_config(small_spec, (1.0, 1.0, 1.0), replicates=0)


if __name__ == "__main__":
    pytest.main([__file__])
