"""Acceptance suite: one test per release criterion, with stated tolerances.

Each test prints a PASS/FAIL line (visible under ``pytest -s``) and asserts
the criterion including its runtime limit where one is stated.
"""
import math
import time

import pytest

from mpsdoe import verify
from mpsdoe.harness import CampaignConfig, PolicySpec, run_campaign


def _report(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def _pooled_se(a: dict, b: dict) -> float:
    return math.sqrt(a["final_stderr"] ** 2 + b["final_stderr"] ** 2)


def test_criterion_1_prop1_regret_half():
    start = time.perf_counter()
    res = verify.check_prop1(seeds=2000, n=50)
    elapsed = time.perf_counter() - start
    _report("criterion-1 prop1 regret 1/2", res.passed and elapsed < 60, f"{res.detail}; {elapsed:.1f}s (< 60s)")
    assert res.passed, res.detail
    assert elapsed < 60


def test_criterion_2_thompson_reduction():
    res = verify.check_thompson_reduction(num_envs=1000)
    _report("criterion-2 Thompson reduction", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_3_theorem1_empirical_bound():
    start = time.perf_counter()
    res = verify.check_theorem1_bound(ns=(8, 16, 32, 64), seeds=500)
    elapsed = time.perf_counter() - start
    _report("criterion-3 regret bound", res.passed and elapsed < 120, f"{res.detail}; {elapsed:.1f}s (< 120s)")
    assert res.passed, res.detail
    assert elapsed < 120


def test_criterion_4_value_decomposition():
    res = verify.check_valuedecomp(num_instances=20, tol=1e-10)
    _report("criterion-4 value decomposition", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_5_information_gain_suite():
    res = verify.check_mig_suite()
    _report("criterion-5 information-gain suite", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_6_condition_checkers():
    res = verify.check_conditions_canonical(depth=4)
    _report("criterion-6 condition checkers", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_7_greedy_vs_optimal_bound():
    res = verify.check_greedy_vs_optimal(pairs=((2, 2), (4, 2), (4, 4)))
    _report("criterion-7 greedy vs optimal", res.passed, res.detail)
    assert res.passed, res.detail


def _ordering_campaign(env_id: str, master_seed: int):
    cfg = CampaignConfig(
        environment=env_id,
        policies=[PolicySpec("mps"), PolicySpec("rand"), PolicySpec("myopic_oracle")],
        n=100,
        seeds=10,
        master_seed=master_seed,
    )
    result = run_campaign(cfg)
    return result["summary"]["per_policy"]


@pytest.mark.slow
def test_criterion_8a_experiment1_ordering():
    start = time.perf_counter()
    stats = _ordering_campaign("exp1", master_seed=31)
    elapsed = time.perf_counter() - start
    mps, rand, oracle = stats["mps"], stats["rand"], stats["myopic_oracle"]
    gap_rand = rand["final_mean"] - mps["final_mean"]
    ok_rand = gap_rand >= _pooled_se(mps, rand)
    ok_oracle = oracle["final_mean"] <= mps["final_mean"] + _pooled_se(oracle, mps)
    ok_time = elapsed < 600
    detail = (
        f"final penalties mps {mps['final_mean']:.5f} rand {rand['final_mean']:.5f} "
        f"oracle {oracle['final_mean']:.5f}; rand-mps gap {gap_rand:.5f} >= pooled se "
        f"{_pooled_se(mps, rand):.5f}: {ok_rand}; oracle within: {ok_oracle}; {elapsed:.0f}s (< 600s)"
    )
    _report("criterion-8 experiment-1 ordering", ok_rand and ok_oracle and ok_time, detail)
    assert ok_rand and ok_oracle and ok_time, detail


@pytest.mark.slow
def test_criterion_8b_experiment2_ordering():
    start = time.perf_counter()
    stats = _ordering_campaign("exp2", master_seed=37)
    elapsed = time.perf_counter() - start
    mps, rand, oracle = stats["mps"], stats["rand"], stats["myopic_oracle"]
    gap_rand = rand["final_mean"] - mps["final_mean"]
    ok_rand = gap_rand >= _pooled_se(mps, rand)
    ok_oracle = oracle["final_mean"] <= mps["final_mean"] + _pooled_se(oracle, mps)
    ok_time = elapsed < 600
    detail = (
        f"final penalties mps {mps['final_mean']:.5f} rand {rand['final_mean']:.5f} "
        f"oracle {oracle['final_mean']:.5f}; rand-mps gap {gap_rand:.5f} >= pooled se "
        f"{_pooled_se(mps, rand):.5f}: {ok_rand}; oracle within: {ok_oracle}; {elapsed:.0f}s (< 600s)"
    )
    _report("criterion-8 experiment-2 ordering", ok_rand and ok_oracle and ok_time, detail)
    assert ok_rand and ok_oracle and ok_time, detail


def test_criterion_9_campaign_determinism(tmp_path):
    res = verify.check_determinism(str(tmp_path), seeds=5, n=20)
    _report("criterion-9 determinism", res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_10_plot_component_is_optional():
    # the plotting package is a separate component consuming only emitted
    # files; this suite must pass with it absent (its own tests cover it)
    try:
        import doeplots  # noqa: F401

        detail = "plot package installed; its test suite covers rendering"
    except ImportError:
        detail = "plot package absent; criteria 1-9 ran without it"
    _report("criterion-10 plot component optional", True, detail)
