"""Simple cyclic reservoirs: construction, state runs, ridge readouts.

The reservoir couples N tanh units in a single ring with one shared
weight, and feeds the input (plus a bias of one) to every unit with one
shared magnitude whose per-unit signs come from a fixed digit sequence.
Construction is therefore fully deterministic: two models built from
equal hyperparameters are identical, with no RNG involved.

The recurrent matrix is never materialized; a ring multiply is a cyclic
shift followed by a scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DegenerateSeriesError, SingularSystemError
from .seriesgen import TimeSeries

__all__ = [
    "SCRParams",
    "SCRModel",
    "CVConfig",
    "Task",
    "one_step_task",
    "build_scr",
    "run_reservoir",
    "fit_readout",
    "predict",
    "nmse",
    "fold_blocks",
    "cv_objective",
    "CVEvaluator",
]


@dataclass(frozen=True)
class SCRParams:
    """The four tunable reservoir hyperparameters.

    Attributes
    ----------
    n_nodes : int
        Number of reservoir units.
    input_weight : float
        Shared magnitude of the input weights, in [0, 1].
    cyclic_weight : float
        Shared ring weight, in [0, 1]; equals the spectral radius.
    ridge : float
        L2 penalty on the readout (bias included), >= 0.
    """

    n_nodes: int
    input_weight: float
    cyclic_weight: float
    ridge: float

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        if not 0.0 <= self.input_weight <= 1.0:
            raise ValueError("input_weight must be in [0, 1]")
        if not 0.0 <= self.cyclic_weight <= 1.0:
            raise ValueError("cyclic_weight must be in [0, 1]")
        if self.ridge < 0.0:
            raise ValueError("ridge must be nonnegative")

    @classmethod
    def from_point(cls, x) -> "SCRParams":
        """Build params from an array ordered like the search space:
        (n_nodes, input_weight, cyclic_weight, ridge)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (4,):
            raise ValueError("expected a 4-vector")
        return cls(int(round(x[0])), float(x[1]), float(x[2]), float(x[3]))

    def to_point(self) -> np.ndarray:
        return np.array(
            [float(self.n_nodes), self.input_weight, self.cyclic_weight, self.ridge]
        )


@dataclass(frozen=True)
class SCRModel:
    """A built reservoir: hyperparameters plus the fixed input signs."""

    params: SCRParams
    input_signs: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.params.n_nodes


@dataclass(frozen=True)
class CVConfig:
    """Fold count and washout for the cross-validated loss."""

    k_folds: int = 5
    washout: int = 100

    def __post_init__(self):
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if self.washout < 0:
            raise ValueError("washout must be nonnegative")


class Task(NamedTuple):
    """An input series paired with its one-step-ahead targets."""

    inputs: TimeSeries
    targets: TimeSeries


def one_step_task(series: TimeSeries) -> Task:
    """Self-prediction task: input at t is the series value at t, the
    target is the value at t+1."""
    if len(series) < 2:
        raise ValueError("need at least 2 points for a one-step task")
    return Task(
        TimeSeries(series.values[:-1].copy(), dt=series.dt, meta=series.meta),
        TimeSeries(series.values[1:].copy(), dt=series.dt, meta=series.meta),
    )


@lru_cache(maxsize=None)
def _pi_digit_signs(n: int) -> tuple:
    """Signs from the decimal expansion of pi: + where the i-th digit
    after the decimal point is >= 5, - otherwise.  Seedless and
    reproducible across platforms."""
    with mpmath.workdps(n + 25):
        digits = mpmath.nstr(mpmath.mp.pi, n + 15, strip_zeros=False).split(".")[1]
    return tuple(1.0 if int(d) >= 5 else -1.0 for d in digits[:n])


def build_scr(params: SCRParams) -> SCRModel:
    """Deterministically instantiate a reservoir for the given params."""
    signs = np.array(_pi_digit_signs(params.n_nodes))
    return SCRModel(params=params, input_signs=signs)


def _series_values(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=float)


def run_reservoir(model: SCRModel, inputs, x0: np.ndarray | None = None) -> np.ndarray:
    """Drive the reservoir over an input sequence.

    Row t of the returned (T, N) matrix is the state after seeing input
    t:  x(t) = tanh(signs * w_in * (1 + s(t)) + w * shift(x(t-1))),
    starting from ``x0`` (zeros by default).  Entries are strictly
    inside (-1, 1).
    """
    s = _series_values(inputs)
    if s.size == 0:
        raise ValueError("inputs must be non-empty")
    n = model.n_nodes
    w = model.params.cyclic_weight
    drive = np.outer(1.0 + s, model.input_signs * model.params.input_weight)

    if x0 is None:
        x = np.zeros(n)
    else:
        x = np.asarray(x0, dtype=float)
        if x.shape != (n,):
            raise ValueError(f"x0 must have shape ({n},)")
        x = x.copy()

    states = np.empty((s.size, n))
    for t in range(s.size):
        x = np.tanh(drive[t] + w * np.roll(x, 1))
        states[t] = x
    return states


def _solve_ridge(gram: np.ndarray, rhs: np.ndarray, ridge: float) -> np.ndarray:
    a = gram.copy()
    a[np.diag_indices_from(a)] += ridge
    try:
        return cho_solve(cho_factor(a), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "normal equations not positive definite; use a larger ridge penalty"
        ) from exc


def fit_readout(
    states: np.ndarray,
    targets,
    ridge: float,
    sample_weights: np.ndarray | None = None,
) -> np.ndarray:
    """Ridge-regress targets on [1, states] rows.

    Minimizes sum_t w_t (y_t - [1, x_t] @ beta)^2 + ridge * ||beta||^2
    and returns beta of length N+1 (bias first).  The penalty applies
    to all coefficients, bias included.

    Raises
    ------
    SingularSystemError
        If the normal equations are singular (rank-deficient states
        with ridge=0).
    """
    y = _series_values(targets)
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[0] != y.size:
        raise ValueError("states rows must match targets length")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    design = np.hstack([np.ones((states.shape[0], 1)), states])
    if sample_weights is None:
        gram = design.T @ design
        rhs = design.T @ y
    else:
        weights = np.asarray(sample_weights, dtype=float)
        if weights.shape != y.shape:
            raise ValueError("sample_weights must match targets length")
        if np.any(weights < 0):
            raise ValueError("sample_weights must be nonnegative")
        gram = design.T @ (design * weights[:, None])
        rhs = design.T @ (weights * y)
    return _solve_ridge(gram, rhs, ridge)


def predict(model: SCRModel, readout: np.ndarray, inputs, x0: np.ndarray | None = None) -> TimeSeries:
    """One-step predictions [1, x(t)] @ readout for every input step."""
    readout = np.asarray(readout, dtype=float)
    if readout.shape != (model.n_nodes + 1,):
        raise ValueError(f"readout must have length {model.n_nodes + 1} (bias first)")
    states = run_reservoir(model, inputs, x0)
    values = readout[0] + states @ readout[1:]
    dt = inputs.dt if isinstance(inputs, TimeSeries) else 1.0
    return TimeSeries(values, dt=dt, meta="prediction")


def nmse(targets, predictions) -> float:
    """Squared error normalized by the targets' centered sum of squares.

    0 is a perfect prediction; 1 matches always predicting the mean.
    """
    y = _series_values(targets)
    yhat = _series_values(predictions)
    if y.size != yhat.size:
        raise ValueError("length mismatch")
    if y.size < 2:
        raise ValueError("need at least 2 points")
    denom = float(np.sum((y - y.mean()) ** 2))
    if denom == 0.0:
        raise DegenerateSeriesError("targets have zero variance")
    return float(np.sum((y - yhat) ** 2) / denom)


def fold_blocks(n: int, k: int) -> list[np.ndarray]:
    """Split indices 0..n-1 into k contiguous blocks, earlier blocks
    one longer when k does not divide n."""
    if k < 2:
        raise ValueError("need at least 2 folds")
    if n < k:
        raise ValueError(f"cannot make {k} non-empty folds from {n} points")
    return np.array_split(np.arange(n), k)


class CVEvaluator:
    """K-fold cross-validated loss of an SCR on one task.

    States are computed once over the whole series and shared by all
    folds; each fold ridge-fits a readout on the rows outside it and
    records the summed squared error on the held-out rows.  The value
    returned is the average of the K held-out sums.

    Per-fold Gram matrices depend on the reservoir geometry but not on
    the ridge penalty, so the most recent geometry is cached; sweeps
    that vary only the ridge (e.g. a parameter grid with the penalty in
    the innermost loop) reuse it.
    """

    def __init__(self, task: Task, cv: CVConfig):
        if len(task.inputs) != len(task.targets):
            raise ValueError("inputs and targets must have equal length")
        if len(task.inputs) - cv.washout < cv.k_folds:
            raise ValueError(
                f"series too short: washout {cv.washout} leaves fewer than "
                f"{cv.k_folds} usable points"
            )
        self.task = task
        self.cv = cv
        self._cache_key = None
        self._cache = None

    def _fold_systems(self, params: SCRParams):
        key = (params.n_nodes, params.input_weight, params.cyclic_weight)
        if key == self._cache_key:
            return self._cache
        model = build_scr(params)
        states = run_reservoir(model, self.task.inputs)
        usable = slice(self.cv.washout, None)
        design = np.hstack([np.ones((states.shape[0] - self.cv.washout, 1)), states[usable]])
        y = self.task.targets.values[usable]
        systems = []
        for block in fold_blocks(y.size, self.cv.k_folds):
            mask = np.ones(y.size, dtype=bool)
            mask[block] = False
            x_out = design[mask]
            systems.append(
                (x_out.T @ x_out, x_out.T @ y[mask], design[block], y[block])
            )
        self._cache_key = key
        self._cache = systems
        return systems

    def __call__(self, params: SCRParams) -> float:
        fold_sums = [
            float(np.sum((y_in - x_in @ _solve_ridge(gram, rhs, params.ridge)) ** 2))
            for gram, rhs, x_in, y_in in self._fold_systems(params)
        ]
        return float(np.mean(fold_sums))


def cv_objective(params: SCRParams, task: Task, cv: CVConfig) -> float:
    """Average held-out squared error over K contiguous folds.

    Equivalent to ``CVEvaluator(task, cv)(params)``; build an evaluator
    directly when sweeping many parameter settings on one task.
    """
    return CVEvaluator(task, cv)(params)
