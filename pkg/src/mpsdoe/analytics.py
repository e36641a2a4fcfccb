"""Criteria, Bayesian regret estimation, maximum information gain and the
exact discrete information-theoretic utilities used by the verification suites.

Mutual information is in nats throughout.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    DataSequence,
    DiscreteOutcome,
    EnumerationBoundError,
    Environment,
    FiniteEnvironment,
)
from .policies import Policy

MIG_ENUM_CAP = 2 * 10**6


def cumulative_penalty(env: Environment, theta_star, data: DataSequence) -> float:
    """Criterion C: the sum of penalties over all prefixes of the sequence."""
    return sum(env.penalty.value(theta_star, data.prefix(t)) for t in range(1, len(data) + 1))


def final_penalty(env: Environment, theta_star, data: DataSequence) -> float:
    """Criterion F: the penalty of the full sequence."""
    return env.penalty.value(theta_star, data)


@dataclass
class RegretReport:
    """Aggregate of paired policy-vs-baseline runs drawn from the prior."""

    per_step_penalty: np.ndarray  # mean per-step penalty of the policy, length n
    cumulative: float
    final: float
    baseline_cumulative: float
    baseline_final: float
    seeds: int
    stderr_cumulative: float  # standard error of the paired C differences
    stderr_final: float  # standard error of the paired F differences

    @property
    def regret_cumulative(self) -> float:
        return self.cumulative - self.baseline_cumulative

    @property
    def regret_final(self) -> float:
        return self.final - self.baseline_final

    def to_dict(self) -> dict:
        return {
            "per_step_penalty": [float(v) for v in self.per_step_penalty],
            "cumulative": self.cumulative,
            "final": self.final,
            "baseline_cumulative": self.baseline_cumulative,
            "baseline_final": self.baseline_final,
            "seeds": self.seeds,
            "stderr_cumulative": self.stderr_cumulative,
            "stderr_final": self.stderr_final,
            "regret_cumulative": self.regret_cumulative,
            "regret_final": self.regret_final,
        }


def _stderr(x: np.ndarray) -> float:
    if len(x) < 2:
        return 0.0
    return float(np.std(x, ddof=1) / math.sqrt(len(x)))


def bayes_regret(
    env: Environment,
    policy_spec,
    baseline_spec,
    n: int,
    seeds: int,
    master_seed: int,
    lookahead=None,
) -> RegretReport:
    """Run policy and baseline with a common true-parameter draw per seed and
    report the mean and standard error of the criterion differences."""
    from .harness import run_one  # local import: harness builds on the modules below

    pol_cum, pol_fin = np.empty(seeds), np.empty(seeds)
    base_cum, base_fin = np.empty(seeds), np.empty(seeds)
    step_sum = np.zeros(n)
    for s in range(seeds):
        rec_p = run_one(env, policy_spec, n, s, master_seed, lookahead)
        rec_b = run_one(env, baseline_spec, n, s, master_seed, lookahead)
        pol_cum[s], pol_fin[s] = rec_p.cumulative, rec_p.final
        base_cum[s], base_fin[s] = rec_b.cumulative, rec_b.final
        step_sum += [row.penalty for row in rec_p.trace]
    return RegretReport(
        per_step_penalty=step_sum / seeds,
        cumulative=float(pol_cum.mean()),
        final=float(pol_fin.mean()),
        baseline_cumulative=float(base_cum.mean()),
        baseline_final=float(base_fin.mean()),
        seeds=seeds,
        stderr_cumulative=_stderr(pol_cum - base_cum),
        stderr_final=_stderr(pol_fin - base_fin),
    )


# ---------------------------------------------------------------------------
# Discrete information-theoretic utilities


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) in nats; infinite when q gives zero mass where p does not."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    mask = p > 0
    return float(-np.sum(p[mask] * np.log(p[mask])))


def mutual_information_from_joint(joint: np.ndarray) -> float:
    """I(A; B) from a joint probability table of shape (|A|, |B|), in nats."""
    joint = np.asarray(joint, dtype=float)
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    mask = joint > 0
    outer = pa[:, None] * pb[None, :]
    return float(np.sum(joint[mask] * np.log(joint[mask] / outer[mask])))


@dataclass
class MIGReport:
    n: int
    psi_n: float
    method: str  # exact_enumeration | greedy | closed_form_blr
    argmax_sequence: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"n": self.n, "psi_n": self.psi_n, "method": self.method, "argmax_sequence": self.argmax_sequence}


def _sequence_mi(env: FiniteEnvironment, xseq: Sequence[int]) -> float:
    cond = np.ones((env.num_theta, 1))
    for x in xseq:
        cond = (cond[:, :, None] * env.likelihood[:, x, :][:, None, :]).reshape(env.num_theta, -1)
    joint = env.prior[:, None] * cond
    return mutual_information_from_joint(joint)


def mig_exact(env: FiniteEnvironment, n: int) -> MIGReport:
    """Maximum information gain over all non-adaptive length-n action sequences."""
    if n == 0:
        return MIGReport(0, 0.0, "exact_enumeration", [])
    size = (len(env.actions) * env.num_outcomes) ** n
    if size > MIG_ENUM_CAP:
        raise EnumerationBoundError(
            f"exact search over {size} sequence/outcome combinations exceeds {MIG_ENUM_CAP}; use mig_greedy"
        )
    best, best_seq = -1.0, None
    for xseq in itertools.product(range(len(env.actions)), repeat=n):
        mi = _sequence_mi(env, xseq)
        if mi > best + 1e-15:
            best, best_seq = mi, xseq
    return MIGReport(n, best, "exact_enumeration", list(best_seq))


def mig_greedy(env: FiniteEnvironment, n: int) -> MIGReport:
    """Greedy non-adaptive sequence; a lower bound on the maximum information gain."""
    if env.num_outcomes**n * env.num_theta > MIG_ENUM_CAP:
        raise EnumerationBoundError("outcome-history table would exceed the size cap")
    cond = np.ones((env.num_theta, 1))
    current_mi = 0.0
    seq: list[int] = []
    for _ in range(n):
        best_gain, best_x, best_cond = -np.inf, 0, None
        for x in range(len(env.actions)):
            ext = (cond[:, :, None] * env.likelihood[:, x, :][:, None, :]).reshape(env.num_theta, -1)
            mi = mutual_information_from_joint(env.prior[:, None] * ext)
            gain = mi - current_mi
            if gain > best_gain + 1e-15:
                best_gain, best_x, best_cond = gain, x, ext
        seq.append(best_x)
        cond = best_cond
        current_mi += best_gain
    return MIGReport(n, current_mi, "greedy", seq)


def mig_blr(feature_grid: np.ndarray, prior_cov: np.ndarray, noise_var: float, n: int) -> MIGReport:
    """Greedy D-optimal design for a linear-Gaussian model, with the exact
    closed-form Gaussian information of the selected design."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    if n == 0:
        return MIGReport(0, 0.0, "closed_form_blr", [])
    phi = np.atleast_2d(np.asarray(feature_grid, dtype=float))
    prior_cov = np.atleast_2d(np.asarray(prior_cov, dtype=float))
    d = prior_cov.shape[0]
    evals, evecs = np.linalg.eigh(prior_cov)
    root = evecs @ np.diag(np.sqrt(np.maximum(evals, 0.0))) @ evecs.T
    tilde = phi @ root / math.sqrt(noise_var)  # (G, d)
    a_inv = np.eye(d)
    chosen: list[int] = []
    selected = np.zeros((d, d))
    for _ in range(n):
        v = tilde @ a_inv  # (G, d)
        gains = np.einsum("gd,gd->g", v, tilde)
        g = int(np.argmax(gains))
        chosen.append(g)
        u = a_inv @ tilde[g]
        a_inv = a_inv - np.outer(u, u) / (1.0 + gains[g])
        selected += np.outer(tilde[g], tilde[g])
    sign, logdet = np.linalg.slogdet(np.eye(d) + selected)
    return MIGReport(n, 0.5 * logdet, "closed_form_blr", chosen)


def theorem1_bound(B: float, n: int, action_count: int, psi_n: float) -> float:
    """Regret bound B * sqrt(n * |X| * psi_n / 2)."""
    if min(B, n, action_count, psi_n) < 0:
        raise ValueError("all inputs must be non-negative")
    return B * math.sqrt(n * action_count * psi_n / 2.0)


def theorem2_rhs(reward_opt_gamma_n: float, gamma: float, B: float, n: int, action_count: int, psi_n: float) -> float:
    """Lower bound (1-gamma) * reward_opt - B * sqrt(|X| * psi_n / (2n))."""
    if not (0.0 <= gamma < 1.0):
        raise ValueError("gamma must lie in [0, 1)")
    if not (0.0 <= reward_opt_gamma_n <= 1.0):
        raise ValueError("reward must lie in [0, 1]")
    return (1.0 - gamma) * reward_opt_gamma_n - B * math.sqrt(action_count * psi_n / (2.0 * n))


# ---------------------------------------------------------------------------
# Exact trajectory enumeration on finite environments


def _policy_for(policy_by_theta, k: int) -> Policy:
    return policy_by_theta(k) if callable(policy_by_theta) else policy_by_theta


def trajectory_joint(env: FiniteEnvironment, policy_by_theta, n: int) -> list[tuple[DataSequence, np.ndarray]]:
    """All length-n trajectories with their per-parameter probabilities P(d | theta_k).

    ``policy_by_theta`` is either one policy (used for every parameter) or a
    callable k -> policy, for policies that know the true parameter.
    """
    k_count = env.num_theta
    if (len(env.actions) * env.num_outcomes) ** n * k_count > MIG_ENUM_CAP:
        raise EnumerationBoundError("trajectory enumeration would exceed the size cap")
    policies = [_policy_for(policy_by_theta, k) for k in range(k_count)]
    frontier: list[tuple[DataSequence, np.ndarray]] = [(DataSequence.empty(), np.ones(k_count))]
    for t in range(1, n + 1):
        nxt = []
        for data, probs in frontier:
            dists = np.stack([policies[k].action_distribution(env, data, t) for k in range(k_count)])
            for ai in range(len(env.actions)):
                pa = dists[:, ai]
                if np.all(pa == 0.0):
                    continue
                for yi in range(env.num_outcomes):
                    py = env.likelihood[:, ai, yi]
                    branch = probs * pa * py
                    if np.all(branch == 0.0):
                        continue
                    nxt.append((data.append((env.actions[ai], DiscreteOutcome(yi))), branch))
        frontier = nxt
    return frontier


def expected_final_penalty(env: FiniteEnvironment, theta_star: int, policy: Policy, n: int) -> float:
    """Exact expected final penalty of a policy run for n steps under theta_star."""
    return _expected_penalty(env, theta_star, policy, n, cumulative=False)


def expected_cumulative_penalty(env: FiniteEnvironment, theta_star: int, policy: Policy, n: int) -> float:
    """Exact expected cumulative penalty (the loss J) under theta_star."""
    return _expected_penalty(env, theta_star, policy, n, cumulative=True)


def _expected_penalty(env, theta_star, policy, n, cumulative) -> float:
    if (len(env.actions) * env.num_outcomes) ** n > MIG_ENUM_CAP:
        raise EnumerationBoundError("policy-value enumeration would exceed the size cap")

    def recurse(data: DataSequence, t: int) -> float:
        if t > n:
            return 0.0
        dist = policy.action_distribution(env, data, t)
        total = 0.0
        for ai, pa in enumerate(dist):
            if pa == 0.0:
                continue
            for yi, py in enumerate(env.likelihood[theta_star, ai]):
                if py == 0.0:
                    continue
                nxt = data.append((env.actions[ai], DiscreteOutcome(yi)))
                pen = env.penalty.value(theta_star, nxt)
                contrib = recurse(nxt, t + 1)
                if cumulative:
                    contrib += pen
                elif t == n:
                    contrib = pen
                total += pa * py * contrib
        return total

    return recurse(DataSequence.empty(), 1)


def submodular_bound_check(env: FiniteEnvironment, theta_star: int, n: int, m: int, lookahead=None) -> dict:
    """Greedy-vs-optimal comparison: expected final penalty of the myopic
    oracle over n steps against the global oracle over m steps, with the
    exp(-n/m) slack on the uncovered mass."""
    from .policies import GlobalOraclePolicy, MyopicOraclePolicy
    from .lookahead import LookaheadConfig

    cfg = lookahead or LookaheadConfig()
    lam_greedy = expected_final_penalty(env, theta_star, MyopicOraclePolicy(theta_star, cfg), n)
    lam_opt = expected_final_penalty(env, theta_star, GlobalOraclePolicy(theta_star, horizon=m), m)
    rhs = lam_opt + math.exp(-n / m) * (1.0 - lam_opt)
    return {
        "lam_greedy_n": lam_greedy,
        "lam_opt_m": lam_opt,
        "rhs": rhs,
        "holds": lam_greedy <= rhs + 1e-12,
    }


def mi_chain_rule_values(env: FiniteEnvironment, policy_by_theta, n: int) -> tuple[float, float]:
    """(sum of per-step conditional informations, total information of D_n)."""
    k_count = env.num_theta
    policies = [_policy_for(policy_by_theta, k) for k in range(k_count)]
    if (len(env.actions) * env.num_outcomes) ** n * k_count > MIG_ENUM_CAP:
        raise EnumerationBoundError("chain-rule enumeration would exceed the size cap")

    frontier: list[tuple[DataSequence, np.ndarray]] = [(DataSequence.empty(), np.ones(k_count))]
    chain_sum = 0.0
    for t in range(1, n + 1):
        nxt = []
        for data, cond in frontier:  # cond[k] = P(d | theta_k)
            marg = float(env.prior @ cond)
            if marg == 0.0:
                continue
            post = env.prior * cond / marg
            dists = np.stack([policies[k].action_distribution(env, data, t) for k in range(k_count)])
            # joint over (theta, next pair) given this history
            pair_probs = dists[:, :, None] * env.likelihood  # (K, A, Y)
            joint = post[:, None] * pair_probs.reshape(k_count, -1)
            chain_sum += marg * mutual_information_from_joint(joint)
            for ai in range(len(env.actions)):
                for yi in range(env.num_outcomes):
                    branch = cond * dists[:, ai] * env.likelihood[:, ai, yi]
                    if np.all(branch == 0.0):
                        continue
                    nxt.append((data.append((env.actions[ai], DiscreteOutcome(yi))), branch))
        frontier = nxt

    joint_final = np.stack([env.prior * cond for _, cond in frontier], axis=1)  # (K, traj)
    total_mi = mutual_information_from_joint(joint_final)
    return chain_sum, total_mi


def mi_chain_rule_check(env: FiniteEnvironment, policy_by_theta, n: int, tolerance: float = 1e-10) -> bool:
    lhs, rhs = mi_chain_rule_values(env, policy_by_theta, n)
    return abs(lhs - rhs) <= tolerance
