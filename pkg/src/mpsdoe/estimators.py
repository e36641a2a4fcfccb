"""Estimators that turn a data sequence into a parameter estimate.

Each estimator is a deterministic pure function of the data sequence (results
are memoised by sequence content, never by identity). They expose a batched
``estimate_appended`` used by the look-ahead: the estimate for ``D + (x, y)``
for many candidate pairs at once, sharing all per-``D`` work.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from . import _accel
from .core import DataSequence, EstimatorDivergenceError, RealOutcome


class LogisticCurveMLE:
    """Ridge-regularised maximum-likelihood fit of a three-parameter logistic
    decay curve, by warm-started gradient ascent.

    The estimate for a sequence is defined recursively: the empty sequence
    maps to the prior mean, and appending one observation applies a fixed
    number of adaptively-scaled gradient steps starting from the previous
    estimate. This keeps the estimator deterministic and cheap inside the
    look-ahead, where thousands of one-point extensions are fitted per
    decision.
    """

    def __init__(self, prior_mean, lr: float = 0.05, steps_per_obs: int = 25, ridge: float = 1e-4):
        self.prior_mean = np.asarray(prior_mean, dtype=float)
        self.lr = float(lr)
        self.steps_per_obs = int(steps_per_obs)
        self.ridge = float(ridge)
        self._cache: dict[tuple, np.ndarray] = {(): self.prior_mean.copy()}

    def _xy_arrays(self, data: DataSequence) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([a.coords[0] for a, _ in data], dtype=float)
        ys = np.array([y.scalar for _, y in data], dtype=float)
        return xs, ys

    def estimate(self, data: DataSequence) -> np.ndarray:
        key = data.key()
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        prev = self.estimate(data.prefix(len(data) - 1))
        xs, ys = self._xy_arrays(data)
        out = _accel.adam_logistic(
            prev[None, :].copy(), xs[None, :], ys[None, :],
            self.steps_per_obs, self.lr, self.ridge, self.prior_mean,
        )[0]
        if not np.all(np.isfinite(out)):
            raise EstimatorDivergenceError("logistic MLE diverged", self.steps_per_obs * len(data))
        self._cache[key] = out
        return out

    def estimate_appended(self, data: DataSequence, xs_new: np.ndarray, ys_new: np.ndarray) -> np.ndarray:
        """Estimates for data + one appended (x, y), batched over candidates.

        xs_new: (B,) appended x coordinates; ys_new: (B,) appended outcomes.
        Returns (B, 3).
        """
        base = self.estimate(data)
        xs0, ys0 = self._xy_arrays(data)
        b = len(xs_new)
        X = np.empty((b, len(xs0) + 1))
        Y = np.empty_like(X)
        X[:, :-1] = xs0
        Y[:, :-1] = ys0
        X[:, -1] = xs_new
        Y[:, -1] = ys_new
        params0 = np.tile(base, (b, 1))
        out = _accel.adam_logistic(params0, X, Y, self.steps_per_obs, self.lr, self.ridge, self.prior_mean)
        if not np.all(np.isfinite(out)):
            raise EstimatorDivergenceError("logistic MLE diverged", self.steps_per_obs * (len(data) + 1))
        return out


class RidgeEstimator:
    """Closed-form ridge regression over a fixed feature map on the action grid."""

    def __init__(self, features: np.ndarray, reg: float):
        self.features = np.asarray(features, dtype=float)  # (grid, d)
        self.dim = self.features.shape[1]
        self.reg = float(reg)
        self._stats: dict[tuple, tuple[np.ndarray, np.ndarray]] = {
            (): (np.zeros((self.dim, self.dim)), np.zeros(self.dim))
        }

    def _suff_stats(self, data: DataSequence) -> tuple[np.ndarray, np.ndarray]:
        key = data.key()
        cached = self._stats.get(key)
        if cached is not None:
            return cached
        xtx, xty = self._suff_stats(data.prefix(len(data) - 1))
        a, y = data.last()
        phi = self.features[a.index]
        xtx = xtx + np.outer(phi, phi)
        xty = xty + phi * y.scalar
        self._stats[key] = (xtx, xty)
        return xtx, xty

    def estimate(self, data: DataSequence) -> np.ndarray:
        xtx, xty = self._suff_stats(data)
        return np.linalg.solve(xtx + self.reg * np.eye(self.dim), xty)

    def estimate_appended(self, data: DataSequence, action_indices: np.ndarray, ys_new: np.ndarray) -> np.ndarray:
        """Sherman-Morrison rank-one extension of the ridge solution, batched.

        Returns (B, d) ridge estimates for data + (x_b, y_b).
        """
        xtx, xty = self._suff_stats(data)
        a_inv = np.linalg.inv(xtx + self.reg * np.eye(self.dim))
        phis = self.features[np.asarray(action_indices, dtype=int)]  # (B, d)
        v = phis @ a_inv  # rows are A^{-1} phi_b (A symmetric)
        s = 1.0 + np.einsum("bd,bd->b", v, phis)
        u0 = a_inv @ xty
        c1 = v @ xty
        c2 = np.einsum("bd,bd->b", v, phis)
        # (A + phi phi^T)^{-1} (b + phi y) = u0 + v*y - v*(c1 + c2*y)/s
        p = u0[None, :] - v * (c1 / s)[:, None]
        q = v * (1.0 - c2 / s)[:, None]
        return p + q * np.asarray(ys_new, dtype=float)[:, None]


class RBFKernel:
    """Isotropic-per-dimension squared-exponential covariance."""

    def __init__(self, lengthscales, signal_var: float):
        self.lengthscales = np.atleast_1d(np.asarray(lengthscales, dtype=float))
        self.signal_var = float(signal_var)

    def __call__(self, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
        xa = np.atleast_2d(xa) / self.lengthscales
        xb = np.atleast_2d(xb) / self.lengthscales
        d2 = np.sum(xa**2, axis=1)[:, None] + np.sum(xb**2, axis=1)[None, :] - 2.0 * xa @ xb.T
        return self.signal_var * np.exp(-0.5 * np.maximum(d2, 0.0))


class GPMeanEstimator:
    """Gaussian-process posterior mean on a fixed grid, as a plug-in estimate.

    ``estimate_appended`` exploits that the refit mean is affine in the new
    outcome: mean_{D+(x,y)}(grid) = mean_D(grid) + h_x * (y - mean_D(x)) / s_x
    with h_x the posterior cross-covariance and s_x the predictive variance
    at x plus noise.
    """

    JITTER = 1e-8

    def __init__(self, kernel: RBFKernel, noise_var: float, grid_coords: np.ndarray, component: int = 0):
        self.kernel = kernel
        self.noise_var = float(noise_var)
        self.grid = np.asarray(grid_coords, dtype=float)
        self.component = component  # which outcome component this estimator reads
        self.prior_grid = kernel(self.grid, self.grid)
        self._cache: dict[tuple, tuple] = {}

    def _y_value(self, outcome: RealOutcome) -> float:
        return outcome.values[self.component]

    def _state(self, data: DataSequence) -> tuple:
        """(mean on grid, posterior covariance on grid) for the conditioning data."""
        key = data.key()
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if len(data) == 0:
            state = (np.zeros(len(self.grid)), self.prior_grid.copy())
        else:
            idx = np.array(data.action_indices, dtype=int)
            ys = np.array([self._y_value(y) for _, y in data], dtype=float)
            xtr = self.grid[idx]
            k_tt = self.kernel(xtr, xtr) + (self.noise_var + self.JITTER) * np.eye(len(idx))
            k_gt = self.prior_grid[:, idx]
            try:
                cho = scipy.linalg.cho_factor(k_tt, lower=True)
            except np.linalg.LinAlgError as exc:  # pragma: no cover
                raise np.linalg.LinAlgError("Gram matrix not positive definite after jitter") from exc
            alpha = scipy.linalg.cho_solve(cho, ys)
            w = scipy.linalg.cho_solve(cho, k_gt.T)  # (t, grid)
            mean = k_gt @ alpha
            cov = self.prior_grid - k_gt @ w
            state = (mean, cov)
        self._cache[key] = state
        return state

    def estimate(self, data: DataSequence) -> np.ndarray:
        return self._state(data)[0]

    def estimate_appended(self, data: DataSequence, action_indices: np.ndarray, ys_new: np.ndarray) -> np.ndarray:
        mean, cov = self._state(data)
        idx = np.asarray(action_indices, dtype=int)
        h = cov[:, idx]  # (grid, B)
        s = cov[idx, idx] + self.noise_var + self.JITTER  # (B,)
        resid = np.asarray(ys_new, dtype=float) - mean[idx]
        return mean[None, :] + (h * (resid / s)[None, :]).T
