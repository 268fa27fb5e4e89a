"""Synthetic benchmark series: Mackey-Glass and NARMA generators.

Both generators are deterministic functions of their arguments and the
seed, so experiment repetitions can be reproduced exactly.  Generated
series come back as :class:`TimeSeries`, a thin wrapper around a float
array with a sampling interval and a free-form label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, DivergedRealizationError, IntegrationDivergedError

__all__ = [
    "TimeSeries",
    "SplitSpec",
    "gen_mackey_glass",
    "gen_narma",
    "narma_targets",
    "standardize",
    "split",
]

# Internal Runge-Kutta step for the delay integration.  Coarse explicit
# steps visibly distort the attractor geometry, 0.1 does not.
_MG_DT = 0.1
_MG_BURN_IN = 1000
_NARMA_DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar sequence.

    Attributes
    ----------
    values : np.ndarray
        1-D float array, all entries finite.
    dt : float
        Sampling interval in abstract time units.
    meta : str
        Free-form label carried through transformations.
    """

    values: np.ndarray
    dt: float = 1.0
    meta: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("TimeSeries requires a non-empty 1-D array")
        if not np.all(np.isfinite(values)):
            raise ValueError("TimeSeries values must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SplitSpec:
    """Contiguous train/test split lengths, applied from the start."""

    train_len: int
    test_len: int

    def __post_init__(self):
        if self.train_len < 1 or self.test_len < 1:
            raise ValueError("split lengths must be positive")


def _mg_rhs(x, x_delayed):
    return 0.2 * x_delayed / (1.0 + x_delayed ** 10) - 0.1 * x


def _cubic_weights(s: float) -> np.ndarray:
    """Lagrange cubic weights on four equispaced nodes 0..3 at position s."""
    return np.array([
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ])


def gen_mackey_glass(
    tau: float,
    n_samples: int,
    noise_std: float = 0.0,
    seed: int = 0,
    history: float = 0.5,
) -> TimeSeries:
    """Integrate the Mackey-Glass delay differential equation.

        dx/dt = 0.2 x(t - tau) / (1 + x(t - tau)^10) - 0.1 x(t)

    Fourth-order Runge-Kutta with internal step 0.1 (smaller for tiny
    tau) and cubic interpolation into the delay buffer; the history is
    the constant ``history`` on [-tau, 0].  After a 1000-time-unit
    burn-in the state is sampled at unit intervals.  White Gaussian
    noise of standard deviation ``noise_std`` is added after
    integration.

    Raises
    ------
    IntegrationDivergedError
        If the state becomes non-finite during integration.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if noise_std < 0:
        raise ValueError("noise_std must be nonnegative")

    steps_per_unit = max(int(round(1.0 / min(_MG_DT, tau / 10.0))), 10)
    dt = 1.0 / steps_per_unit
    burn_steps = _MG_BURN_IN * steps_per_unit
    n_steps = burn_steps + (n_samples - 1) * steps_per_unit

    # The three RK stage offsets query the delay buffer at j + off - tau/dt.
    # The fractional position is the same at every step, so each stage has a
    # fixed 4-point cubic stencil relative to the current index.
    delay_steps = tau / dt
    stages = []
    for off in (0.0, 0.5, 1.0):
        shift = off - delay_steps
        anchor = int(np.floor(shift)) - 1  # stencil covers anchor .. anchor+3
        weights = _cubic_weights(shift - np.floor(shift) + 1.0)
        stages.append((shift, anchor, weights))

    grid = np.empty(n_steps + 1)
    grid[0] = history

    def delayed(j: int, stage: int) -> float:
        shift, anchor, weights = stages[stage]
        if j + shift <= 0.0:
            return history
        lo = j + anchor
        if lo < 0:
            # Stencil straddles t=0: missing nodes take the history value.
            nodes = np.array([history if lo + m < 0 else grid[lo + m] for m in range(4)])
            return float(weights @ nodes)
        return float(weights @ grid[lo:lo + 4])

    for j in range(n_steps):
        x = grid[j]
        d1 = delayed(j, 0)
        d2 = delayed(j, 1)
        d3 = delayed(j, 2)
        k1 = _mg_rhs(x, d1)
        k2 = _mg_rhs(x + 0.5 * dt * k1, d2)
        k3 = _mg_rhs(x + 0.5 * dt * k2, d2)
        k4 = _mg_rhs(x + dt * k3, d3)
        x_next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(x_next):
            raise IntegrationDivergedError(f"state diverged at t={(j + 1) * dt:.1f}")
        grid[j + 1] = x_next

    values = grid[burn_steps::steps_per_unit][:n_samples].copy()
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        values = values + rng.normal(0.0, noise_std, size=values.size)
    return TimeSeries(values, dt=1.0, meta=f"mackey-glass tau={tau:g}")


def narma_targets(inputs: np.ndarray, order: int) -> np.ndarray:
    """Run the NARMA recurrence over a given input sequence.

    With m = ``order``, y(0) = 0 and for k >= 0

        y(k+1) = 0.3 y(k) + 0.05 y(k) sum_{i=0}^{m-1} y(k-i)
                 + 1.5 s(k-m+1) s(k) + 0.1

    where y and s are zero for negative indices.  Returns
    ``[y(1), ..., y(n)]`` for n input samples, i.e. entry k is the
    target one step ahead of input k.

    Raises
    ------
    DivergedRealizationError
        If |y| exceeds 1e6 (happens occasionally at high orders).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    s = np.asarray(inputs, dtype=float)
    n = s.size
    y = np.zeros(n + 1)  # y[k] = y(k), y(0) = 0, negative indices are 0
    for k in range(n):
        window = y[max(0, k - order + 1) : k + 1].sum()
        s_lag = s[k - order + 1] if k - order + 1 >= 0 else 0.0
        y[k + 1] = 0.3 * y[k] + 0.05 * y[k] * window + 1.5 * s_lag * s[k] + 0.1
        if abs(y[k + 1]) > _NARMA_DIVERGENCE_LIMIT:
            raise DivergedRealizationError(
                f"order-{order} realization diverged at step {k + 1}; retry with a new seed"
            )
    return y[1:]


def gen_narma(order: int, n_samples: int, seed: int = 0) -> tuple[TimeSeries, TimeSeries]:
    """Generate a NARMA input/target pair.

    Inputs are i.i.d. uniform on (0, 0.5); targets follow the
    order-``order`` recurrence (see :func:`narma_targets`).  Entry k of
    the target series is y(k+1), the value predicted from inputs up to
    index k.  Both series have length ``n_samples``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, 0.5, size=n_samples)
    y = narma_targets(s, order)
    label = f"narma-{order}"
    return (
        TimeSeries(s, dt=1.0, meta=f"{label} inputs"),
        TimeSeries(y, dt=1.0, meta=f"{label} targets"),
    )


def standardize(series: TimeSeries) -> tuple[TimeSeries, float, float]:
    """Shift and scale a series to zero mean and unit standard deviation.

    Returns the standardized series together with the original mean and
    standard deviation so the transform can be inverted.

    Raises
    ------
    DegenerateSeriesError
        If the series has zero variance.
    """
    if len(series) < 2:
        raise ValueError("standardize requires at least 2 points")
    mean = float(np.mean(series.values))
    std = float(np.std(series.values))
    if std == 0.0:
        raise DegenerateSeriesError("series has zero variance")
    values = (series.values - mean) / std
    return TimeSeries(values, dt=series.dt, meta=series.meta), mean, std


def split(series: TimeSeries, spec: SplitSpec) -> tuple[TimeSeries, TimeSeries]:
    """Cut the first ``train_len`` points and the next ``test_len`` points."""
    if spec.train_len + spec.test_len > len(series):
        raise ValueError(
            f"split ({spec.train_len}, {spec.test_len}) exceeds series length {len(series)}"
        )
    train = series.values[: spec.train_len]
    test = series.values[spec.train_len : spec.train_len + spec.test_len]
    return (
        TimeSeries(train.copy(), dt=series.dt, meta=series.meta),
        TimeSeries(test.copy(), dt=series.dt, meta=series.meta),
    )
