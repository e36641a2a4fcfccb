"""Decision policies: posterior sampling, oracles and a uniform-random baseline.

The posterior-sampling policy holds a posterior handle; the harness owns the
sample -> act -> observe -> update cycle and swaps in the refreshed posterior
after each observation. Oracles know the true parameter. The global oracle
solves the remaining-horizon tree exactly and optimises the final penalty.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Action,
    DataSequence,
    DiscreteOutcome,
    EnumerationBoundError,
    Environment,
    FiniteEnvironment,
)
from .inference import DiscretePosterior, Posterior, discrete_update, sample_parameter
from .lookahead import LookaheadConfig, LookaheadStats, argmin_lookahead

ENUM_CAP = 10**7


class Policy:
    policy_id: str = "policy"

    def step(self, env: Environment, data: DataSequence, rng: np.random.Generator, t: int) -> Action:
        raise NotImplementedError

    def action_distribution(self, env: FiniteEnvironment, data: DataSequence, t: int) -> np.ndarray:
        """Exact distribution over actions at this state (finite environments)."""
        raise NotImplementedError


@dataclass
class RandomPolicy(Policy):
    policy_id: str = "rand"

    def step(self, env, data, rng, t) -> Action:
        return env.actions[int(rng.integers(len(env.actions)))]

    def action_distribution(self, env, data, t) -> np.ndarray:
        return np.full(len(env.actions), 1.0 / len(env.actions))


@dataclass
class MPSPolicy(Policy):
    """Sample a parameter from the posterior, act myopically as if it were true."""

    posterior: Posterior = None
    lookahead: LookaheadConfig = field(default_factory=LookaheadConfig)
    policy_id: str = "mps"
    stats: LookaheadStats | None = None

    def step(self, env, data, rng, t) -> Action:
        theta = sample_parameter(self.posterior, rng)
        return argmin_lookahead(env, theta, data, self.lookahead, rng, self.stats)

    def action_distribution(self, env, data, t) -> np.ndarray:
        post = discrete_update(DiscretePosterior(env.prior.copy()), env, data)
        dist = np.zeros(len(env.actions))
        cfg = self.lookahead
        for k, w in enumerate(post.weights):
            if w == 0.0:
                continue
            a = argmin_lookahead(env, k, data, cfg)
            dist[a.index] += w
        return dist


@dataclass
class MyopicOraclePolicy(Policy):
    """One-step-optimal policy that knows the true parameter."""

    theta_star: object = None
    lookahead: LookaheadConfig = field(default_factory=LookaheadConfig)
    policy_id: str = "myopic_oracle"
    stats: LookaheadStats | None = None

    def step(self, env, data, rng, t) -> Action:
        return argmin_lookahead(env, self.theta_star, data, self.lookahead, rng, self.stats)

    def action_distribution(self, env, data, t) -> np.ndarray:
        dist = np.zeros(len(env.actions))
        dist[argmin_lookahead(env, self.theta_star, data, self.lookahead).index] = 1.0
        return dist


@dataclass
class GlobalOraclePolicy(Policy):
    """Horizon-aware optimal adaptive policy (expectimax over the remaining tree).

    Minimises the expected final penalty by default; a cumulative-objective
    variant is available behind ``optimize_cumulative``.
    """

    theta_star: object = None
    horizon: int = 1
    optimize_cumulative: bool = False
    policy_id: str = "global_oracle"

    def _check_bound(self, env: FiniteEnvironment, remaining: int) -> None:
        if (len(env.actions) * env.num_outcomes) ** remaining > ENUM_CAP:
            raise EnumerationBoundError(
                f"expectimax tree of size ({len(env.actions)}*{env.num_outcomes})^{remaining} exceeds {ENUM_CAP}"
            )

    def _value(self, env: FiniteEnvironment, data: DataSequence, remaining: int) -> float:
        if remaining == 0:
            return 0.0 if self.optimize_cumulative else env.penalty.value(self.theta_star, data)
        best = np.inf
        for a in env.actions:
            probs = env.likelihood[self.theta_star, a.index]
            v = 0.0
            for yi, p in enumerate(probs):
                if p == 0.0:
                    continue
                nxt = data.append((a, DiscreteOutcome(yi)))
                step_pen = env.penalty.value(self.theta_star, nxt) if self.optimize_cumulative else 0.0
                v += p * (step_pen + self._value(env, nxt, remaining - 1))
            if v < best:
                best = v
        return best

    def step(self, env, data, rng, t) -> Action:
        if not env.is_finite:
            raise EnumerationBoundError("global oracle requires a finite environment")
        remaining = self.horizon - len(data)
        if remaining <= 0:
            raise ValueError("global oracle stepped past its horizon")
        self._check_bound(env, remaining)
        best_i, best_v = 0, np.inf
        for i, a in enumerate(env.actions):
            probs = env.likelihood[self.theta_star, a.index]
            v = 0.0
            for yi, p in enumerate(probs):
                if p == 0.0:
                    continue
                nxt = data.append((a, DiscreteOutcome(yi)))
                step_pen = env.penalty.value(self.theta_star, nxt) if self.optimize_cumulative else 0.0
                v += p * (step_pen + self._value(env, nxt, remaining - 1))
            if v < best_v:
                best_i, best_v = i, v
        return env.actions[best_i]

    def action_distribution(self, env, data, t) -> np.ndarray:
        dist = np.zeros(len(env.actions))
        dist[self.step(env, data, None, t).index] = 1.0
        return dist


def q_value(
    env: FiniteEnvironment,
    theta_star: int,
    data: DataSequence,
    x: Action,
    y: DiscreteOutcome,
    policy: Policy,
    n: int,
) -> float:
    """Expected total penalty: incurred so far, plus the (x, y) step, plus the
    exact expectation of future penalties when following ``policy`` to step n."""
    t = len(data)
    if t >= n:
        raise ValueError("q_value needs at least one step remaining")
    if (len(env.actions) * env.num_outcomes) ** (n - t - 1) > ENUM_CAP:
        raise EnumerationBoundError("q_value enumeration would exceed the size cap")

    past = sum(env.penalty.value(theta_star, data.prefix(j)) for j in range(1, t + 1))
    nxt = data.append((x, y))
    return past + env.penalty.value(theta_star, nxt) + _expected_future(env, theta_star, nxt, policy, t + 2, n)


def _expected_future(env, theta_star, data, policy, t_next, n) -> float:
    if t_next > n:
        return 0.0
    dist = policy.action_distribution(env, data, t_next)
    total = 0.0
    for ai, pa in enumerate(dist):
        if pa == 0.0:
            continue
        a = env.actions[ai]
        for yi, py in enumerate(env.likelihood[theta_star, ai]):
            if py == 0.0:
                continue
            nxt = data.append((a, DiscreteOutcome(yi)))
            pen = env.penalty.value(theta_star, nxt)
            total += pa * py * (pen + _expected_future(env, theta_star, nxt, policy, t_next + 1, n))
    return total
