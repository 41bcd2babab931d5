"""Tests for periodogram analysis."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdslrm.analysis import dominant_harmonics, periodogram
from fdslrm.exceptions import InputError

T24 = np.arange(1, 25)


def test_constant_series_has_no_power():
    """Test a constant series gives zero ordinates."""
    ordinates = periodogram(np.full(24, 3.5))
    assert len(ordinates) == 12
    assert all(item.power == pytest.approx(0.0, abs=1e-20) for item in ordinates)


def test_pure_tone():
    """Test the maximal ordinate of cos(2 pi 3 t / 24) is at h = 3."""
    ordinates = periodogram(np.cos(2 * np.pi * 3 * T24 / 24))
    best = max(ordinates, key=lambda item: item.power)
    assert best.harmonic == 3
    assert best.frequency == pytest.approx(2 * np.pi * 3 / 24)
    assert best.power == pytest.approx(6.0)


def test_two_tones_power_ratio():
    """Test two tones give dominant ordinates at h = 3 and h = 7 in ratio 4:1."""
    x = np.cos(2 * np.pi * 3 * T24 / 24) + 0.5 * np.sin(2 * np.pi * 7 * T24 / 24)
    ordinates = periodogram(x, sort=True)
    assert [item.harmonic for item in ordinates[:2]] == [3, 7]
    assert ordinates[0].power / ordinates[1].power == pytest.approx(4.0)
    assert ordinates[2].power == pytest.approx(0.0, abs=1e-20)


def test_matches_direct_summation():
    """Test the FFT path against the defining sum over t = 1..n."""
    x = np.random.default_rng(3).normal(size=15)
    n = x.size
    for item in periodogram(x):
        direct = abs(np.sum(x * np.exp(-1j * item.frequency * np.arange(1, n + 1)))) ** 2 / n
        assert item.power == pytest.approx(direct)


def test_odd_length_harmonics():
    """Test h runs over 1..floor(n/2)."""
    assert [item.harmonic for item in periodogram(np.arange(7.0))] == [1, 2, 3]


def test_dominant_harmonics():
    """Test ranking of the strongest harmonics."""
    x = 2.0 * np.cos(2 * np.pi * 5 * T24 / 24) + np.sin(2 * np.pi * 2 * T24 / 24)
    assert dominant_harmonics(x, count=2) == [5, 2]
    with pytest.raises(ValueError):
        dominant_harmonics(x, count=0)


def test_too_short_series():
    """Test a single observation is rejected."""
    with pytest.raises(InputError):
        periodogram([1.0])


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=40),
    st.floats(-10.0, 10.0, allow_nan=False),
)
def test_power_scales_quadratically(values, scale):
    """Test I(c x) = c^2 I(x)."""
    base = [item.power for item in periodogram(values)]
    scaled = [item.power for item in periodogram([scale * v for v in values])]
    np.testing.assert_allclose(scaled, np.multiply(base, scale**2), rtol=1e-9, atol=1e-6)


if __name__ == "__main__":
    pytest.main([__file__])
