import math

import numpy as np
import pytest

from mpsdoe import analytics
from mpsdoe.catalog import build_bandit, build_prop1, random_finite_env
from mpsdoe.core import Action, DataSequence, DiscreteOutcome, FiniteEnvironment
from mpsdoe.harness import PolicySpec
from mpsdoe.lookahead import LookaheadConfig
from mpsdoe.penalties import TableLookupPenalty, constant_rule
from mpsdoe.policies import MyopicOraclePolicy


def test_cumulative_penalty_empty_and_constant():
    env = random_finite_env(0, num_theta=1, num_actions=2, num_outcomes=1, penalty_kind="table")
    assert analytics.cumulative_penalty(env, 0, DataSequence.empty()) == 0.0

    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    const_env = FiniteEnvironment(
        name="c",
        theta_labels=["t"],
        prior=np.array([1.0]),
        actions=actions,
        likelihood=np.ones((1, 2, 1)),
        penalty=TableLookupPenalty(None, constant_rule(0.3)),
    )
    d = DataSequence(tuple((actions[0], DiscreteOutcome(0)) for _ in range(5)))
    assert analytics.cumulative_penalty(const_env, 0, d) == pytest.approx(5 * 0.3)


def test_cumulative_penalty_hand_sum():
    actions = (Action(0, (0.0,)),)
    values = {1: 0.2, 2: 0.5, 3: 0.1}
    env = FiniteEnvironment(
        name="h",
        theta_labels=["t"],
        prior=np.array([1.0]),
        actions=actions,
        likelihood=np.ones((1, 1, 1)),
        penalty=TableLookupPenalty(None, lambda th, d: values.get(len(d), 0.0)),
    )
    d = DataSequence(tuple((actions[0], DiscreteOutcome(0)) for _ in range(3)))
    assert analytics.cumulative_penalty(env, 0, d) == pytest.approx(0.8)


def test_cumulative_penalty_non_decreasing_in_prefix():
    env = random_finite_env(1, num_theta=2, num_actions=2, num_outcomes=2, penalty_kind="table")
    rng = np.random.default_rng(0)
    pairs = tuple((env.actions[int(rng.integers(2))], DiscreteOutcome(int(rng.integers(2)))) for _ in range(6))
    d = DataSequence(pairs)
    vals = [analytics.cumulative_penalty(env, 0, d.prefix(t)) for t in range(len(d) + 1)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_bayes_regret_self_comparison_exactly_zero():
    env = build_prop1()
    rep = analytics.bayes_regret(env, PolicySpec("mps"), PolicySpec("mps"), n=8, seeds=20, master_seed=1)
    assert rep.regret_cumulative == 0.0
    assert rep.regret_final == 0.0
    assert rep.stderr_final == 0.0


def test_bayes_regret_report_invariants():
    env = build_prop1()
    rep = analytics.bayes_regret(env, PolicySpec("mps"), PolicySpec("myopic_oracle"), n=6, seeds=30, master_seed=2)
    assert rep.cumulative == pytest.approx(float(np.sum(rep.per_step_penalty)), abs=1e-9)
    assert rep.final == pytest.approx(rep.per_step_penalty[-1], abs=1e-12)


def test_bayes_regret_nonnegative_against_oracle_on_bandit():
    env = build_bandit(num_theta=4, num_actions=3)
    rep = analytics.bayes_regret(env, PolicySpec("mps"), PolicySpec("myopic_oracle"), n=12, seeds=80, master_seed=3)
    assert rep.regret_cumulative >= -2 * rep.stderr_cumulative


def test_mig_exact_trivial_and_cap():
    env = random_finite_env(2, num_theta=2, num_actions=2, num_outcomes=2, penalty_kind="table")
    assert analytics.mig_exact(env, 0).psi_n == 0.0
    for n in (1, 2, 3):
        rep = analytics.mig_exact(env, n)
        assert rep.psi_n <= math.log(2) + 1e-12


def test_mig_exact_noiseless_revealing_action():
    # one action reveals the parameter, the other is pure noise
    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    lik = np.array([
        [[1.0, 0.0], [0.5, 0.5]],
        [[0.0, 1.0], [0.5, 0.5]],
    ])
    env = FiniteEnvironment(
        name="reveal",
        theta_labels=["a", "b"],
        prior=np.array([0.5, 0.5]),
        actions=actions,
        likelihood=lik,
        penalty=TableLookupPenalty(None, constant_rule(0.0)),
    )
    rep = analytics.mig_exact(env, 1)
    assert rep.psi_n == pytest.approx(math.log(2), abs=1e-12)
    assert rep.argmax_sequence == [0]


def test_mig_greedy_matches_exact_at_one_and_lower_bounds():
    for i in range(6):
        env = random_finite_env(20 + i, num_theta=3, num_actions=3, num_outcomes=2, penalty_kind="table")
        g1 = analytics.mig_greedy(env, 1)
        e1 = analytics.mig_exact(env, 1)
        assert g1.psi_n == pytest.approx(e1.psi_n, abs=1e-12)
        for n in (2, 3):
            assert analytics.mig_greedy(env, n).psi_n <= analytics.mig_exact(env, n).psi_n + 1e-12


def test_mig_greedy_non_decreasing():
    env = random_finite_env(30, num_theta=3, num_actions=3, num_outcomes=2, penalty_kind="table")
    vals = [analytics.mig_greedy(env, n).psi_n for n in range(5)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_mig_blr_single_observation_closed_form():
    rep = analytics.mig_blr(np.array([[1.0]]), np.array([[1.0]]), 1.0, 1)
    assert rep.psi_n == pytest.approx(0.5 * math.log(2), abs=1e-12)
    assert analytics.mig_blr(np.array([[1.0]]), np.array([[1.0]]), 1.0, 0).psi_n == 0.0


def test_mig_blr_logarithmic_growth():
    rng = np.random.default_rng(4)
    grid = rng.standard_normal((30, 4))
    ns = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512]
    psis = [analytics.mig_blr(grid, np.eye(4), 0.5, n).psi_n for n in ns]
    fitted_c = max(p / (4 * math.log(n + 1)) for p, n in zip(psis[:7], ns[:7]))
    for p, n in zip(psis, ns):
        assert p <= fitted_c * 4 * math.log(n + 1) + 1e-9


def test_theorem1_bound_hand_values():
    assert analytics.theorem1_bound(2.0, 10, 3, 0.0) == 0.0
    assert analytics.theorem1_bound(1.0, 4, 2, math.log(2)) == pytest.approx(1.6651, abs=1e-4)
    assert analytics.theorem1_bound(3.0, 4, 2, math.log(2)) == pytest.approx(3 * 1.66511, abs=1e-3)


def test_theorem2_rhs_hand_values():
    assert analytics.theorem2_rhs(0.8, 0.0, 1.0, 64, 2, 0.0) == pytest.approx(0.8)
    got = analytics.theorem2_rhs(0.8, 0.25, 2.0, 64, 2, math.log(2))
    assert got == pytest.approx(0.3918, abs=1e-4)
    lo, hi = (analytics.theorem2_rhs(0.8, g, 2.0, 64, 2, math.log(2)) for g in (0.1, 0.5))
    assert hi < lo


def test_mi_chain_rule_trivial_and_random():
    env = random_finite_env(40, num_theta=2, num_actions=2, num_outcomes=2, penalty_kind="table")
    pol = lambda k: MyopicOraclePolicy(k, LookaheadConfig())  # noqa: E731
    lhs, rhs = analytics.mi_chain_rule_values(env, pol, 1)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    assert analytics.mi_chain_rule_check(env, pol, 3, tolerance=1e-10)


def test_mi_chain_rule_uninformative_env_gives_zero():
    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    lik = np.full((2, 2, 2), 0.5)  # outcomes independent of the parameter
    env = FiniteEnvironment(
        name="flat",
        theta_labels=["a", "b"],
        prior=np.array([0.5, 0.5]),
        actions=actions,
        likelihood=lik,
        penalty=TableLookupPenalty(None, constant_rule(0.0)),
    )
    pol = lambda k: MyopicOraclePolicy(k, LookaheadConfig())  # noqa: E731
    lhs, rhs = analytics.mi_chain_rule_values(env, pol, 3)
    assert lhs == pytest.approx(0.0, abs=1e-12)
    assert rhs == pytest.approx(0.0, abs=1e-12)


def test_mi_bounded_by_parameter_entropy():
    for i in range(8):
        env = random_finite_env(50 + i, num_theta=3, num_actions=2, num_outcomes=2, penalty_kind="table")
        pol = lambda k: MyopicOraclePolicy(k, LookaheadConfig())  # noqa: E731
        _, total = analytics.mi_chain_rule_values(env, pol, 3)
        assert total <= analytics.entropy(env.prior) + 1e-12


def test_kl_divergence_basics():
    p = np.array([0.5, 0.5])
    q = np.array([0.9, 0.1])
    assert analytics.kl_divergence(p, p) == 0.0
    assert analytics.kl_divergence(p, q) > 0
    assert analytics.kl_divergence(p, np.array([1.0, 0.0])) == math.inf
