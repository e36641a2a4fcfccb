import numpy as np
import pytest

from mpsdoe import conditions
from mpsdoe.catalog import (
    build_bandit,
    build_bo_det,
    build_coverage,
    build_lastpair,
    build_prop1,
    build_shortsight,
)
from mpsdoe.core import Action, FiniteEnvironment
from mpsdoe.penalties import BOSimpleRegretPenalty, TableLookupPenalty, constant_rule

DEPTH = 4


def _constant_env(c=0.4, actions=2, outcomes=2):
    acts = tuple(Action(i, (float(i),)) for i in range(actions))
    return FiniteEnvironment(
        name="const",
        theta_labels=["t"],
        prior=np.array([1.0]),
        actions=acts,
        likelihood=np.full((1, actions, outcomes), 1.0 / outcomes),
        penalty=TableLookupPenalty(None, constant_rule(c)),
    )


def test_episodic_bandit_holds_h1():
    env = build_bandit(num_theta=2, num_actions=2)
    rep = conditions.check_episodic(env, H=1, depth=DEPTH)
    assert rep.holds and rep.fitted_constant == 1.0
    assert conditions.derive_B(rep) == 1.0


def test_episodic_bo_fails_h1_with_witness():
    f = np.array([[0.1, 0.9]])
    acts = (Action(0, (0.0,)), Action(1, (1.0,)))
    env = FiniteEnvironment(
        name="bo2",
        theta_labels=["t"],
        prior=np.array([1.0]),
        actions=acts,
        likelihood=np.full((1, 2, 2), 0.5),
        penalty=BOSimpleRegretPenalty(lambda k: f[int(k)]),
    )
    env.penalty.bind_actions(acts)
    rep = conditions.check_episodic(env, H=1, depth=DEPTH)
    assert not rep.holds
    assert rep.witness is not None
    assert conditions.replay_witness(env, rep)


def test_episodic_constant_holds_every_h():
    env = _constant_env()
    for h in (1, 2, 3, 4):
        assert conditions.check_episodic(env, H=h, depth=DEPTH).holds


def test_episodic_monotone_in_h_for_last_pair_penalty():
    env = build_lastpair()
    assert conditions.check_episodic(env, H=1, depth=DEPTH).holds
    for h in (2, 3, 4):
        assert conditions.check_episodic(env, H=h, depth=DEPTH).holds


def test_recoverability_last_pair_alpha_zero():
    env = build_lastpair()
    rep = conditions.check_recoverability(env, depth=DEPTH)
    assert rep.holds
    assert rep.fitted_constant == 0.0
    assert conditions.derive_B(rep) == 1.0


def test_recoverability_constant_alpha_zero():
    rep = conditions.check_recoverability(_constant_env(), depth=DEPTH)
    assert rep.holds and rep.fitted_constant == 0.0


def test_recoverability_prop1_fails_with_replayable_witness():
    env = build_prop1()
    rep = conditions.check_recoverability(env, depth=DEPTH)
    assert not rep.holds
    assert rep.fitted_constant >= 1.0
    assert rep.witness is not None
    assert conditions.replay_witness(env, rep)


def test_recoverability_fitted_alpha_is_tight():
    env = build_prop1()
    rep = conditions.check_recoverability(env, depth=3)
    w = rep.binding
    d1 = conditions._seq_from_indices(env, w["d1"])
    d2 = conditions._seq_from_indices(env, w["d2"])
    ev = conditions._Evaluator(env)
    eps = ev.value(w["theta"], d1) - ev.value(w["theta"], d2)
    lhs = ev.min_expected_after(w["theta"], d1)
    rhs = ev.min_expected_after(w["theta"], d2)
    alpha = rep.fitted_constant
    assert lhs <= rhs + alpha * eps + 1e-12
    assert lhs > rhs + (alpha - 1e-9) * eps


def test_more_data_better_bo_holds():
    env = build_bo_det()
    rep = conditions.check_more_data_better(env, depth=3, k=2)
    assert rep.holds


def test_more_data_better_k0_monotone_prefix_reduction():
    env = build_bo_det()
    rep = conditions.check_more_data_better(env, depth=3, k=0)
    assert rep.holds


def test_more_data_better_shortsight_fails_with_witness():
    env = build_shortsight()
    rep = conditions.check_more_data_better(env, depth=3, k=1)
    assert not rep.holds
    assert rep.witness is not None
    assert conditions.replay_witness(env, rep)


def test_monotone_submodular_bo_det_holds():
    env = build_bo_det()
    rep = conditions.check_monotone_submodular(env, depth=DEPTH)
    assert rep.holds


def test_monotone_submodular_coverage_holds():
    env = build_coverage()
    rep = conditions.check_monotone_submodular(env, depth=DEPTH)
    assert rep.holds


def test_monotone_submodular_bandit_fails_with_witness():
    env = build_bandit(num_theta=2, num_actions=2)
    rep = conditions.check_monotone_submodular(env, depth=3)
    assert not rep.holds
    assert rep.witness is not None
    assert conditions.replay_witness(env, rep)


def test_monotone_submodular_constant_holds_with_equality():
    rep = conditions.check_monotone_submodular(_constant_env(), depth=DEPTH)
    assert rep.holds


def test_derive_b_rules():
    ep = conditions.ConditionReport("Episodic", True, None, 3.0, 4)
    assert conditions.derive_B(ep) == 3.0
    rec = conditions.ConditionReport("Recoverability", True, None, 0.5, 4)
    assert conditions.derive_B(rec) == pytest.approx(2.0)
    mdb = conditions.ConditionReport("MoreDataBetter", True, None, None, 4)
    assert conditions.derive_B(mdb) == 2.0
    bad = conditions.ConditionReport("Episodic", False, {"theta": 0}, None, 4)
    with pytest.raises(ValueError):
        conditions.derive_B(bad)


def test_reports_serialise():
    env = build_prop1()
    reports = conditions.standard_condition_reports(env, depth=3)
    assert set(reports) == {"Episodic", "Recoverability", "MoreDataBetter", "MonotoneSubmodular"}
    for rep in reports.values():
        assert isinstance(rep["holds"], bool)
