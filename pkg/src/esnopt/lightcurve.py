"""Light-curve preprocessing: phase folding, binning, smoothing.

Irregularly sampled astronomical series (with a known period) are
turned into regular :class:`~esnopt.seriesgen.TimeSeries` by folding on
the period, averaging into phase bins, filling empty bins with a local
quadratic, and smoothing with a Savitzky-Golay filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_coeffs

from .errors import InsufficientCoverageError
from .seriesgen import TimeSeries

__all__ = ["IrregularSeries", "fold", "bin_series", "savgol"]


@dataclass(frozen=True)
class IrregularSeries:
    """Scalar samples at arbitrary (sorted, possibly tied) times."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or values.ndim != 1 or times.size != values.size:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if times.size < 1:
            raise ValueError("series must be non-empty")
        if np.any(np.diff(times) < 0):
            raise ValueError("times must be sorted")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("times and values must be finite")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.times.size


def fold(series: IrregularSeries, period: float) -> IrregularSeries:
    """Map sample times to phases modulo ``period`` and sort by phase.

    Values are untouched; ties in phase keep the original time order.
    """
    if period <= 0:
        raise ValueError("period must be positive")
    phases = np.mod(series.times, period)
    order = np.argsort(phases, kind="stable")
    return IrregularSeries(phases[order], series.values[order])


def _quadratic_fill(centers, means, filled, period):
    """Fill empty bins with a quadratic through the 3 nearest filled bins.

    Neighbor distance is circular in phase; each neighbor enters the fit
    at its offset from the empty bin's center along the shorter way
    around, so gaps at the phase seam are handled like any other.
    """
    filled_idx = np.flatnonzero(filled)
    out = means.copy()
    for i in np.flatnonzero(~filled):
        offsets = centers[filled_idx] - centers[i]
        offsets -= period * np.round(offsets / period)  # wrap to (-P/2, P/2]
        nearest = filled_idx[np.argsort(np.abs(offsets), kind="stable")[:3]]
        x = centers[nearest] - centers[i]
        x -= period * np.round(x / period)
        coeffs = np.polynomial.polynomial.polyfit(x, means[nearest], 2)
        out[i] = coeffs[0]  # quadratic evaluated at offset 0
    return out


def bin_series(
    series: IrregularSeries,
    n_bins: int,
    n_periods: int,
    period: float,
) -> TimeSeries:
    """Average a folded series into regular phase bins and tile periods.

    The phase axis [0, period) is split into ``n_bins / n_periods``
    equal bins; each bin takes the mean of its member samples and empty
    bins are filled by local quadratic interpolation (phase-wrapped).
    The single-period profile is then tiled ``n_periods`` times, giving
    a series of exactly ``n_bins`` points.

    Raises
    ------
    InsufficientCoverageError
        If fewer than 3 bins contain samples.
    """
    if n_bins < 4:
        raise ValueError("n_bins must be >= 4")
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    if n_bins % n_periods != 0:
        raise ValueError("n_periods must divide n_bins")
    if period <= 0:
        raise ValueError("period must be positive")

    bins_per_period = n_bins // n_periods
    width = period / bins_per_period
    idx = np.minimum((series.times / width).astype(int), bins_per_period - 1)
    if np.any(series.times < 0) or np.any(series.times >= period):
        raise ValueError("samples must lie in [0, period); fold the series first")

    sums = np.bincount(idx, weights=series.values, minlength=bins_per_period)
    counts = np.bincount(idx, minlength=bins_per_period)
    filled = counts > 0
    if int(filled.sum()) < 3:
        raise InsufficientCoverageError(
            f"only {int(filled.sum())} non-empty bins; need at least 3 for quadratic fill"
        )
    means = np.zeros(bins_per_period)
    means[filled] = sums[filled] / counts[filled]
    centers = (np.arange(bins_per_period) + 0.5) * width
    profile = _quadratic_fill(centers, means, filled, period)

    values = np.tile(profile, n_periods)
    return TimeSeries(values, dt=width, meta="binned light curve")


def savgol(series: TimeSeries, window: int, polyorder: int) -> TimeSeries:
    """Savitzky-Golay smoothing with truncated one-sided edge windows.

    Interior points use the standard centered least-squares polynomial
    fit; within half a window of either edge the same polynomial is fit
    on the window truncated to available samples and evaluated at the
    point itself.
    """
    if window % 2 == 0:
        raise ValueError("window must be odd")
    if window <= polyorder:
        raise ValueError("window must exceed polyorder")
    n = len(series)
    if window > n:
        raise ValueError("window exceeds series length")

    y = series.values
    half = window // 2
    coeffs = savgol_coeffs(window, polyorder)
    out = np.convolve(y, coeffs[::-1], mode="same")

    # Truncated least-squares fits near the edges; rank-deficient fits
    # fall back to the minimum-norm solution, which still interpolates.
    for i in range(min(half, n)):
        out[i] = _truncated_fit(y, i, half, polyorder)
    for i in range(max(n - half, 0), n):
        out[i] = _truncated_fit(y, i, half, polyorder)
    return TimeSeries(out, dt=series.dt, meta=series.meta)


def _truncated_fit(y, i, half, polyorder):
    lo = max(0, i - half)
    hi = min(len(y), i + half + 1)
    x = np.arange(lo, hi, dtype=float) - i
    design = np.vander(x, polyorder + 1, increasing=True)
    sol, *_ = np.linalg.lstsq(design, y[lo:hi], rcond=None)
    return sol[0]
