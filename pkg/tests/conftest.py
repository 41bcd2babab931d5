"""Shared builders of random FDSLRM instances."""

from typing import List, Optional, Tuple

import numpy as np
import pytest

from fdslrm.design import DesignSet, realize
from fdslrm.models import ModelSpec, TermSpec


def fourier_term(key: Tuple[str, int]) -> TermSpec:
    kind, harmonic = key
    if harmonic == 0:
        return TermSpec.const()
    return TermSpec(kind=kind, harmonic=harmonic)


def random_orthogonal_spec(
    rng: np.random.Generator,
    n_range: Tuple[int, int] = (12, 200),
    k_max: int = 4,
    l_max: int = 6,
    l_min: int = 1,
) -> ModelSpec:
    """Model built from distinct discrete Fourier vectors."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    keys: List[Tuple[str, int]] = [("cos", 0)]
    keys += [("cos", h) for h in range(1, n // 2 + 1)]
    keys += [("sin", h) for h in range(1, (n + 1) // 2)]
    k = int(rng.integers(0, k_max + 1))
    l = int(rng.integers(l_min, l_max + 1))  # noqa: E741
    chosen = rng.choice(len(keys), size=k + l, replace=False)
    terms = [fourier_term(keys[i]) for i in chosen]
    return ModelSpec(n=n, trend=tuple(terms[:k]), random=tuple(terms[k:]))


def random_general_spec(
    rng: np.random.Generator, n_range: Tuple[int, int] = (12, 200), l_max: int = 6
) -> ModelSpec:
    """Model with raw frequencies and a linear trend, so F'V != 0 in general."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    trend = [TermSpec.const()]
    if rng.random() < 0.5:
        trend.append(TermSpec.poly(1))
    for _ in range(int(rng.integers(0, 3))):
        trend.append(TermSpec(kind="cos", frequency=float(rng.uniform(0.3, 3.0))))
    random = []
    for _ in range(int(rng.integers(1, l_max + 1))):
        kind = "cos" if rng.random() < 0.5 else "sin"
        random.append(TermSpec(kind=kind, frequency=float(rng.uniform(0.3, 3.0))))
    return ModelSpec(n=n, trend=tuple(trend), random=tuple(random))


def random_nu(rng: np.random.Generator, l: int, zero_prob: float = 0.2) -> np.ndarray:  # noqa: E741
    """nu_0 in [0.2, 2], nu_j in [0, 3] with some exact zeros."""
    nu = np.empty(l + 1)
    nu[0] = rng.uniform(0.2, 2.0)
    nu[1:] = rng.uniform(0.0, 3.0, size=l)
    nu[1:][rng.random(l) < zero_prob] = 0.0
    return nu


def draw_series(
    rng: np.random.Generator,
    design: DesignSet,
    nu: np.ndarray,
    beta: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One Gaussian series x = F beta + V y + w."""
    if beta is None:
        beta = rng.normal(size=design.k)
    y = np.sqrt(nu[1:]) * rng.standard_normal(design.l)
    w = np.sqrt(nu[0]) * rng.standard_normal(design.n)
    return design.F @ beta + design.V @ y + w


def orthogonal_instance(
    seed: int, n_range: Tuple[int, int] = (12, 200), l_max: int = 6
) -> Tuple[DesignSet, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    design = realize(random_orthogonal_spec(rng, n_range=n_range, l_max=l_max))
    nu = random_nu(rng, design.l)
    return design, nu, draw_series(rng, design, nu)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20190917)


@pytest.fixture
def cyber_spec() -> ModelSpec:
    """Weekly model shape: n = 72, trend {1, cos h1, sin h3}, random {cos h14, sin h14}."""
    return ModelSpec(
        n=72,
        trend=(TermSpec.const(), TermSpec.cos(1), TermSpec.sin(3)),
        random=(TermSpec.cos(14), TermSpec.sin(14)),
    )


@pytest.fixture
def toy_spec() -> ModelSpec:
    """Hourly model shape: n = 24, trend {1, cos h1, sin h1}, random {cos/sin h3, cos/sin h4}."""
    return ModelSpec(
        n=24,
        trend=(TermSpec.const(), TermSpec.cos(1), TermSpec.sin(1)),
        random=(TermSpec.cos(3), TermSpec.sin(3), TermSpec.cos(4), TermSpec.sin(4)),
    )
