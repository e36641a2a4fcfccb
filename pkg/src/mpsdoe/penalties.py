"""Penalty functions mapping (parameter, data sequence) into [0, 1].

Penalties with unbounded raw forms (squared errors) carry an explicit
normaliser and are clamped into [0, 1]; both raw and normalised values are
recorded by the harness. Each penalty may override ``append_values`` with a
batched fast path used by the look-ahead: the penalty of ``D + (x_b, y_b)``
for a flat batch of candidate extensions of a common prefix ``D``.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .core import Action, DataSequence, RealOutcome


class Penalty:
    """Base penalty: subclasses implement ``raw``; ``value`` normalises and clamps."""

    normalizer: float = 1.0
    clamp: bool = True

    def raw(self, theta, data: DataSequence) -> float:
        raise NotImplementedError

    def value(self, theta, data: DataSequence) -> float:
        v = self.raw(theta, data) / self.normalizer
        if self.clamp:
            v = min(1.0, max(0.0, v))
        return v

    def append_raw(self, theta, data: DataSequence, action_indices: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Raw penalties of data + (x_b, y_b) for a flat candidate batch.

        ``ys`` has shape (B,) or (B, outcome_dim). Default implementation
        materialises each extended sequence; hot penalties override this.
        """
        actions = self._grid_actions
        ys2 = np.atleast_2d(np.asarray(ys, dtype=float).T).T  # (B, dim)
        out = np.empty(len(action_indices))
        for i, (ai, yv) in enumerate(zip(action_indices, ys2)):
            pair = (actions[int(ai)], RealOutcome(tuple(float(v) for v in yv)))
            out[i] = self.raw(theta, data.append(pair))
        return out

    def append_values(self, theta, data: DataSequence, action_indices: np.ndarray, ys: np.ndarray) -> np.ndarray:
        v = self.append_raw(theta, data, action_indices, ys) / self.normalizer
        if self.clamp:
            v = np.clip(v, 0.0, 1.0)
        return v

    def bind_actions(self, actions: Sequence[Action]) -> None:
        """Give the default batched path access to the environment's grid."""
        self._grid_actions = tuple(actions)


class BanditRegretPenalty(Penalty):
    """Instantaneous regret of the last action, normalised by the range of f."""

    def __init__(self, f_values: Callable[[object], np.ndarray]):
        self.f_values = f_values
        self._ftab_cache: dict = {}

    def f_for(self, theta) -> np.ndarray:
        if np.isscalar(theta) or isinstance(theta, (int, np.integer)):
            f = self._ftab_cache.get(theta)
            if f is None:
                f = np.asarray(self.f_values(theta), dtype=float)
                self._ftab_cache[theta] = f
            return f
        return np.asarray(self.f_values(theta), dtype=float)

    def raw(self, theta, data: DataSequence) -> float:
        if len(data) == 0:
            raise ValueError("bandit regret undefined for an empty data sequence")
        f = self.f_for(theta)
        rng = float(f.max() - f.min())
        if rng == 0.0:
            return 0.0
        return float((f.max() - f[data.action_indices[-1]]) / rng)

    def append_raw(self, theta, data, action_indices, ys) -> np.ndarray:
        f = self.f_for(theta)
        rng = float(f.max() - f.min())
        if rng == 0.0:
            return np.zeros(len(action_indices))
        return (f.max() - f[np.asarray(action_indices, dtype=int)]) / rng


class BOSimpleRegretPenalty(Penalty):
    """Gap between the optimum of f and the best value queried so far."""

    def __init__(self, f_values: Callable[[object], np.ndarray]):
        self.f_values = f_values
        self._ftab_cache: dict = {}

    def f_for(self, theta) -> np.ndarray:
        if np.isscalar(theta) or isinstance(theta, (int, np.integer)):
            f = self._ftab_cache.get(theta)
            if f is None:
                f = np.asarray(self.f_values(theta), dtype=float)
                self._ftab_cache[theta] = f
            return f
        return np.asarray(self.f_values(theta), dtype=float)

    def raw(self, theta, data: DataSequence) -> float:
        if len(data) == 0:
            return 1.0
        f = self.f_for(theta)
        rng = float(f.max() - f.min())
        if rng == 0.0:
            return 0.0
        best = max(f[i] for i in data.action_indices)
        return float((f.max() - best) / rng)

    def append_raw(self, theta, data, action_indices, ys) -> np.ndarray:
        f = self.f_for(theta)
        rng = float(f.max() - f.min())
        if rng == 0.0:
            return np.zeros(len(action_indices))
        best = max((f[i] for i in data.action_indices), default=-np.inf)
        new_best = np.maximum(best, f[np.asarray(action_indices, dtype=int)])
        return (f.max() - new_best) / rng


class EstimationErrorPenalty(Penalty):
    """Squared L2 distance between a target functional and its estimate."""

    def __init__(self, tau_of_theta: Callable[[object], np.ndarray], estimator, normalizer: float, xs_for_batch: np.ndarray | None = None):
        self.tau_of_theta = tau_of_theta
        self.estimator = estimator
        self.normalizer = float(normalizer)
        # logistic-style estimators fit against x coordinates, ridge against indices
        self.xs_for_batch = None if xs_for_batch is None else np.asarray(xs_for_batch, dtype=float)

    def raw(self, theta, data: DataSequence) -> float:
        tau = np.asarray(self.tau_of_theta(theta), dtype=float)
        tau_hat = self.estimator.estimate(data)
        return float(np.sum((tau - tau_hat) ** 2))

    def append_raw(self, theta, data, action_indices, ys) -> np.ndarray:
        tau = np.asarray(self.tau_of_theta(theta), dtype=float)
        idx = np.asarray(action_indices, dtype=int)
        yv = np.asarray(ys, dtype=float).reshape(len(idx), -1)[:, 0]
        if self.xs_for_batch is not None:
            tau_hat = self.estimator.estimate_appended(data, self.xs_for_batch[idx], yv)
        else:
            tau_hat = self.estimator.estimate_appended(data, idx, yv)
        return np.sum((tau[None, :] - tau_hat) ** 2, axis=1)


class TransformedL2Penalty(Penalty):
    """Squared L2 norm of sigma(f_theta) - sigma(f_hat) over a quadrature grid."""

    def __init__(
        self,
        field_of_theta: Callable[[object], np.ndarray],
        estimator,
        transform: Callable[[np.ndarray], np.ndarray],
        quad_weights: np.ndarray,
        normalizer: float,
        y_component: int = 0,
    ):
        self.field_of_theta = field_of_theta
        self.estimator = estimator
        self.transform = transform
        self.quad_weights = np.asarray(quad_weights, dtype=float)
        self.normalizer = float(normalizer)
        self.y_component = y_component

    def raw(self, theta, data: DataSequence) -> float:
        f_true = self.transform(np.asarray(self.field_of_theta(theta), dtype=float))
        f_hat = self.transform(self.estimator.estimate(data))
        return float(np.sum(self.quad_weights * (f_true - f_hat) ** 2))

    def append_raw(self, theta, data, action_indices, ys) -> np.ndarray:
        f_true = self.transform(np.asarray(self.field_of_theta(theta), dtype=float))
        idx = np.asarray(action_indices, dtype=int)
        yv = np.asarray(ys, dtype=float).reshape(len(idx), -1)[:, self.y_component]
        means = self.estimator.estimate_appended(data, idx, yv)  # (B, grid)
        diff = self.transform(means) - f_true[None, :]
        return diff**2 @ self.quad_weights


class CombinedPenalty(Penalty):
    """Weighted sum of component penalties, affine in each component value."""

    def __init__(self, components: Sequence[tuple[float, Penalty]]):
        weights = [w for w, _ in components]
        if any(w < 0 for w in weights) or sum(weights) > 1.0 + 1e-12:
            raise ValueError("component weights must be non-negative and sum to at most 1")
        self.components = [(float(w), p) for w, p in components]

    def raw(self, theta, data: DataSequence) -> float:
        return sum(w * p.raw(theta, data) for w, p in self.components)

    def value(self, theta, data: DataSequence) -> float:
        return sum(w * p.value(theta, data) for w, p in self.components)

    def append_values(self, theta, data, action_indices, ys) -> np.ndarray:
        total = np.zeros(len(action_indices))
        for w, p in self.components:
            total += w * p.append_values(theta, data, action_indices, ys)
        return total

    def append_raw(self, theta, data, action_indices, ys) -> np.ndarray:
        total = np.zeros(len(action_indices))
        for w, p in self.components:
            total += w * p.append_raw(theta, data, action_indices, ys)
        return total

    def bind_actions(self, actions) -> None:
        super().bind_actions(actions)
        for _, p in self.components:
            p.bind_actions(actions)


class TableLookupPenalty(Penalty):
    """Explicit (theta index, canonical sequence) -> value map with a default rule."""

    def __init__(self, entries: dict | None, default_rule: Callable[[int, DataSequence], float]):
        self.entries = dict(entries or {})
        for v in self.entries.values():
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"table penalty value {v} outside [0, 1]")
        self.default_rule = default_rule

    def raw(self, theta, data: DataSequence) -> float:
        v = self.entries.get((int(theta), data.key()))
        if v is None:
            v = float(self.default_rule(int(theta), data))
        return v


# Default rules for table penalties.

def forbidden_action_rule(forbidden_by_theta: Sequence[int]) -> Callable[[int, DataSequence], float]:
    """1 if the action forbidden under theta appears anywhere in the sequence."""

    def rule(theta: int, data: DataSequence) -> float:
        return 1.0 if forbidden_by_theta[theta] in data.action_indices else 0.0

    return rule


def coverage_rule(action_sets: Sequence[frozenset], weights: dict) -> Callable[[int, DataSequence], float]:
    """1 minus the weighted fraction of the universe covered by visited actions."""
    total = sum(weights.values())

    def rule(theta: int, data: DataSequence) -> float:
        covered: set = set()
        for i in data.action_indices:
            covered |= action_sets[i]
        return 1.0 - sum(weights[e] for e in covered) / total

    return rule


def last_pair_rule(values: np.ndarray, empty_value: float = 1.0) -> Callable[[int, DataSequence], float]:
    """Penalty depends only on the last (action, outcome) pair; table is (K, |X|, |Y|)."""
    values = np.asarray(values, dtype=float)

    def rule(theta: int, data: DataSequence) -> float:
        if len(data) == 0:
            return empty_value
        a, y = data.last()
        return float(values[theta, a.index, y.index])

    return rule


def history_length_rule(rate: float) -> Callable[[int, DataSequence], float]:
    """Adversarial penalty that grows with the history length."""

    def rule(theta: int, data: DataSequence) -> float:
        return min(1.0, rate * len(data))

    return rule


def constant_rule(c: float) -> Callable[[int, DataSequence], float]:
    def rule(theta: int, data: DataSequence) -> float:
        return c

    return rule
