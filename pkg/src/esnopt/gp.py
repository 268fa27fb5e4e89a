"""Gaussian-process regression with a Matern-5/2 ARD kernel.

Domain-agnostic: inputs are expected to live in a normalized unit
hypercube (the optimizer maps its search space there).  Targets are
centered before fitting, so the prior mean is zero; kernel
hyperparameters are chosen by multistart maximization of the log
marginal likelihood in log space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

from .errors import IllConditionedError

__all__ = [
    "GPModel",
    "matern52",
    "matern52_gram",
    "gp_fit",
    "gp_posterior",
    "gp_posterior_batch",
    "marginal_likelihood",
]

SQRT5 = np.sqrt(5.0)

NOISE_FLOOR = 1e-8
JITTER_START = 1e-10
JITTER_GROWTH = 10.0
JITTER_CAP_FACTOR = 1e-4  # cap = factor * signal_var

# Log-space bounds for the hyperparameter search; lengthscales are in
# normalized units, variances relative to var(y).
LENGTHSCALE_BOUNDS = (1e-2, 1e2)
SIGNAL_VAR_FACTORS = (1e-4, 1e4)


@dataclass(frozen=True)
class GPModel:
    """Fitted posterior: training set, kernel hyperparameters, and the
    cached Cholesky factorization of the noisy Gram matrix."""

    train_x: np.ndarray
    train_y_centered: np.ndarray
    y_offset: float
    lengthscales: np.ndarray
    signal_var: float
    noise_var: float
    chol_lower: np.ndarray
    alpha: np.ndarray
    jitter: float

    @property
    def n_train(self) -> int:
        return self.train_x.shape[0]


def matern52(x1, x2, lengthscales, signal_var: float) -> float:
    """Matern-5/2 covariance between two points with per-dimension
    lengthscales: sv * (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    ls = np.asarray(lengthscales, dtype=float)
    if x1.shape != x2.shape or x1.shape != ls.shape:
        raise ValueError("x1, x2 and lengthscales must have matching shapes")
    if np.any(ls <= 0) or signal_var <= 0:
        raise ValueError("hyperparameters must be positive")
    r = np.sqrt(np.sum(((x1 - x2) / ls) ** 2))
    return float(signal_var * (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * np.exp(-SQRT5 * r))


def matern52_gram(a: np.ndarray, b: np.ndarray, lengthscales, signal_var: float) -> np.ndarray:
    """Cross-covariance matrix between two point sets, shape (len(a), len(b))."""
    ua = np.asarray(a, dtype=float) / lengthscales
    ub = np.asarray(b, dtype=float) / lengthscales
    d2 = np.sum(ua**2, axis=1)[:, None] + np.sum(ub**2, axis=1)[None, :] - 2.0 * (ua @ ub.T)
    r = np.sqrt(np.maximum(d2, 0.0))
    return signal_var * (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * np.exp(-SQRT5 * r)


def _squared_offsets(x: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Per-dimension squared scaled offsets, shape (d, n, n); reused by
    the lengthscale gradient."""
    u = x / lengthscales
    diff = u[:, None, :] - u[None, :, :]
    return np.moveaxis(diff * diff, 2, 0)


def _neg_lml_and_grad(log_theta, x, y, vy):
    """Negative log marginal likelihood and gradient in log-space
    hyperparameters [log lengthscales..., log signal_var, log noise_var]."""
    n, d = x.shape
    ls = np.exp(log_theta[:d])
    sv = np.exp(log_theta[d])
    nv = np.exp(log_theta[d + 1])

    d2 = _squared_offsets(x, ls)
    r = np.sqrt(np.maximum(d2.sum(axis=0), 0.0))
    decay = np.exp(-SQRT5 * r)
    k_signal = sv * (1.0 + SQRT5 * r + 5.0 * r * r / 3.0) * decay
    k = k_signal + nv * np.eye(n)
    try:
        low = np.linalg.cholesky(k)
    except np.linalg.LinAlgError:
        return 1e25, np.zeros_like(log_theta)

    alpha = cho_solve((low, True), y)
    nll = 0.5 * float(y @ alpha) + float(np.log(np.diag(low)).sum()) + 0.5 * n * np.log(2 * np.pi)

    k_inv = cho_solve((low, True), np.eye(n))
    inner = np.outer(alpha, alpha) - k_inv  # d LML / dK = inner / 2

    grad = np.empty_like(log_theta)
    common = (5.0 / 3.0) * sv * decay * (1.0 + SQRT5 * r)
    for j in range(d):
        grad[j] = 0.5 * np.sum(inner * (common * d2[j]))
    grad[d] = 0.5 * np.sum(inner * k_signal)
    grad[d + 1] = 0.5 * nv * np.trace(inner)
    return nll, -grad


def _final_factorization(x, y, ls, sv, nv):
    """Cholesky of the noisy Gram matrix, escalating jitter on failure."""
    k = matern52_gram(x, x, ls, sv) + nv * np.eye(x.shape[0])
    jitter = 0.0
    while True:
        try:
            low = np.linalg.cholesky(k + jitter * np.eye(x.shape[0]))
            break
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * JITTER_GROWTH
            if jitter > JITTER_CAP_FACTOR * sv:
                raise IllConditionedError(
                    f"Cholesky failed at maximum jitter {jitter:.1e}"
                ) from None
    alpha = cho_solve((low, True), y)
    return low, alpha, jitter


def gp_fit(
    xs: np.ndarray,
    ys: np.ndarray,
    restarts: int = 5,
    seed: int = 0,
    warm_start: tuple | None = None,
) -> GPModel:
    """Fit kernel hyperparameters by multistart likelihood maximization.

    Targets are centered; the first start is ``warm_start``
    (lengthscales, signal_var, noise_var) when given, otherwise a
    mid-range default, and the remaining starts are log-uniform draws
    within the bounds.

    Raises
    ------
    IllConditionedError
        If the final Gram matrix cannot be factorized even at maximum
        jitter.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise ValueError("xs must be (n, d) with matching ys")
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least 2 observations")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    y_offset = float(y.mean())
    yc = y - y_offset
    vy = max(float(yc.var()), 1e-12)

    lo = np.concatenate([
        np.full(d, np.log(LENGTHSCALE_BOUNDS[0])),
        [np.log(SIGNAL_VAR_FACTORS[0] * vy), np.log(NOISE_FLOOR)],
    ])
    hi = np.concatenate([
        np.full(d, np.log(LENGTHSCALE_BOUNDS[1])),
        [np.log(SIGNAL_VAR_FACTORS[1] * vy), np.log(10.0 * vy + NOISE_FLOOR)],
    ])
    bounds = list(zip(lo, hi))

    rng = np.random.default_rng(seed)
    starts = []
    if warm_start is not None:
        ws_ls, ws_sv, ws_nv = warm_start
        starts.append(np.concatenate([np.log(ws_ls), [np.log(ws_sv), np.log(ws_nv)]]))
    else:
        starts.append(np.concatenate([np.zeros(d) + np.log(0.5), [np.log(vy), np.log(1e-6 * vy + NOISE_FLOOR)]]))
    while len(starts) < restarts:
        starts.append(rng.uniform(lo, hi))

    best = None
    for start in starts:
        theta0 = np.clip(start, lo, hi)
        res = minimize(
            _neg_lml_and_grad,
            theta0,
            args=(x, yc, vy),
            method="L-BFGS-B",
            jac=True,
            bounds=bounds,
            options={"maxiter": 200},
        )
        if best is None or res.fun < best.fun:
            best = res

    theta = best.x
    ls = np.exp(theta[:d])
    sv = float(np.exp(theta[d]))
    nv = float(np.exp(theta[d + 1]))
    low, alpha, jitter = _final_factorization(x, yc, ls, sv, nv)
    return GPModel(
        train_x=x.copy(),
        train_y_centered=yc,
        y_offset=y_offset,
        lengthscales=ls,
        signal_var=sv,
        noise_var=nv,
        chol_lower=low,
        alpha=alpha,
        jitter=jitter,
    )


def gp_posterior_batch(model: GPModel, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation of the latent function at
    each query row; the centering offset is added back to the mean."""
    xq = np.atleast_2d(np.asarray(xs, dtype=float))
    if xq.shape[1] != model.train_x.shape[1]:
        raise ValueError("query dimension mismatch")
    k_star = matern52_gram(xq, model.train_x, model.lengthscales, model.signal_var)
    mean = k_star @ model.alpha + model.y_offset
    v = solve_triangular(model.chol_lower, k_star.T, lower=True)
    var = np.maximum(model.signal_var - np.sum(v * v, axis=0), 0.0)
    return mean, np.sqrt(var)


def gp_posterior(model: GPModel, x) -> tuple[float, float]:
    """Posterior (mean, std) at a single point."""
    mean, std = gp_posterior_batch(model, np.asarray(x, dtype=float)[None, :])
    return float(mean[0]), float(std[0])


def marginal_likelihood(xs, ys, lengthscales, signal_var, noise_var) -> float:
    """Log marginal likelihood of centered targets under given kernel
    hyperparameters (useful for comparing fits)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    yc = y - y.mean()
    theta = np.concatenate([
        np.log(np.asarray(lengthscales, dtype=float)),
        [np.log(signal_var), np.log(noise_var)],
    ])
    nll, _ = _neg_lml_and_grad(theta, x, yc, max(float(yc.var()), 1e-12))
    return -nll
