"""Spectral exploration of a series: periodogram at the Fourier frequencies."""

from typing import List, Sequence

import numpy as np

from .exceptions import InputError
from .models import PeriodogramOrdinate


def periodogram(series: Sequence[float], sort: bool = False) -> List[PeriodogramOrdinate]:
    """Compute periodogram ordinates I(w_h) = |sum_t x(t) exp(-i w_h t)|^2 / n.

    Args:
        series: Observed values x(1), ..., x(n)
        sort: Order by descending power instead of by harmonic

    Returns:
        One ordinate per harmonic h = 1..floor(n/2), w_h = 2*pi*h/n

    Raises:
        InputError: If the series has fewer than two values
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise InputError(f"periodogram needs at least 2 observations, got {n}")

    # shifting t by one only rotates the phase, the modulus is unchanged
    spectrum = np.fft.rfft(x)
    harmonics = np.arange(1, n // 2 + 1)
    power = np.abs(spectrum[harmonics]) ** 2 / n

    ordinates = [
        PeriodogramOrdinate(harmonic=int(h), frequency=2.0 * np.pi * h / n, power=float(p))
        for h, p in zip(harmonics, power)
    ]
    if sort:
        ordinates.sort(key=lambda item: item.power, reverse=True)
    return ordinates


def dominant_harmonics(series: Sequence[float], count: int = 3) -> List[int]:
    """Get the harmonic indices with the largest periodogram power."""
    if count < 1:
        raise ValueError("count must be positive")
    return [item.harmonic for item in periodogram(series, sort=True)[:count]]
