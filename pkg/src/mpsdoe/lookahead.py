"""Expected one-step look-ahead penalty and its minimiser over the action grid.

Finite outcome spaces are enumerated exactly by default; continuous ones use
a Monte-Carlo estimate with common random numbers across candidate actions,
so every candidate sees the same noise realisations within a decision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Action, ContinuousEnvironment, DataSequence, DiscreteOutcome, Environment, FiniteEnvironment


@dataclass
class LookaheadConfig:
    mc_samples: int = 50
    exact_when_finite: bool = True

    def __post_init__(self):
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be at least 1")


@dataclass
class LookaheadStats:
    """Counts logical per-action look-ahead evaluations (one per candidate per decision)."""

    evaluations: int = 0
    decisions: int = 0


def _exact_finite(env: FiniteEnvironment, theta: int, data: DataSequence, action: Action) -> float:
    probs = env.likelihood[theta, action.index]
    total = 0.0
    for yi, p in enumerate(probs):
        if p == 0.0:
            continue
        total += p * env.penalty.value(theta, data.append((action, DiscreteOutcome(yi))))
    return total


def _mc_finite(env: FiniteEnvironment, theta: int, data: DataSequence, action: Action,
               cfg: LookaheadConfig, rng: np.random.Generator) -> float:
    draws = rng.choice(env.num_outcomes, size=cfg.mc_samples, p=env.likelihood[theta, action.index])
    vals = [env.penalty.value(theta, data.append((action, DiscreteOutcome(int(y))))) for y in draws]
    return float(np.mean(vals))


def lookahead_penalty(
    env: Environment,
    theta,
    data: DataSequence,
    action: Action,
    cfg: LookaheadConfig,
    rng: np.random.Generator | None = None,
) -> float:
    """Expected penalty after appending one (action, outcome) pair under theta."""
    if env.is_finite:
        if cfg.exact_when_finite:
            return _exact_finite(env, theta, data, action)
        return _mc_finite(env, theta, data, action, cfg, rng)
    z = rng.standard_normal((cfg.mc_samples, env.outcome_dim))
    ys = env.outcome_from_normals(theta, action.index, z)
    idx = np.full(cfg.mc_samples, action.index)
    vals = env.penalty.append_values(theta, data, idx, ys)
    return float(np.mean(vals))


def argmin_lookahead(
    env: Environment,
    theta,
    data: DataSequence,
    cfg: LookaheadConfig,
    rng: np.random.Generator | None = None,
    stats: LookaheadStats | None = None,
) -> Action:
    """Action minimising the look-ahead penalty; ties resolve to the lowest index."""
    actions = env.actions
    if len(actions) == 0:
        raise ValueError("empty action grid")
    if stats is not None:
        stats.evaluations += len(actions)
        stats.decisions += 1

    if env.is_finite and cfg.exact_when_finite:
        best_i, best_v = 0, np.inf
        for i, a in enumerate(actions):
            v = _exact_finite(env, theta, data, a)
            if v < best_v:
                best_i, best_v = i, v
        return actions[best_i]

    if env.is_finite:
        vals = [_mc_finite(env, theta, data, a, cfg, rng) for a in actions]
        return actions[int(np.argmin(vals))]

    # continuous outcomes: one base-noise draw shared across all candidates
    z = rng.standard_normal((cfg.mc_samples, env.outcome_dim))
    means = _candidate_means(env, theta, cfg.mc_samples, z)
    idx_flat = np.repeat(np.arange(len(actions)), cfg.mc_samples)
    vals = env.penalty.append_values(theta, data, idx_flat, means)
    per_action = vals.reshape(len(actions), cfg.mc_samples).mean(axis=1)
    return actions[int(np.argmin(per_action))]


def _candidate_means(env: ContinuousEnvironment, theta, mc: int, z: np.ndarray) -> np.ndarray:
    """Simulated outcomes for every (action, noise draw) pair, flattened to (A*mc, dim)."""
    all_idx = np.arange(len(env.actions))
    mu = np.asarray(env.mean_fn(theta, all_idx), dtype=float)
    if mu.ndim == 1:
        mu = mu[:, None]
    scale = np.asarray(env.noise_scale(theta), dtype=float)
    ys = mu[:, None, :] + z[None, :, :] * scale  # (A, mc, dim)
    return ys.reshape(len(env.actions) * mc, env.outcome_dim)
