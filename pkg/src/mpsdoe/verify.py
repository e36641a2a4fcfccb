"""Named verification suites behind the ``verify`` CLI subcommand.

Each check returns a CheckResult; the acceptance test module runs the same
functions at their full advertised parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytics, conditions
from .catalog import build_bandit, build_bo_det, build_coverage, build_lastpair, build_prop1, random_finite_env
from .core import DataSequence
from .harness import PolicySpec, substream
from .inference import DiscretePosterior, discrete_update, sample_parameter
from .lookahead import LookaheadConfig
from .policies import GlobalOraclePolicy, MyopicOraclePolicy, RandomPolicy, q_value


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


def check_prop1(seeds: int = 2000, n: int = 50, master_seed: int = 11) -> CheckResult:
    """Final-penalty regret of posterior sampling vs the myopic oracle is 1/2."""
    env = build_prop1()
    report = analytics.bayes_regret(
        env, PolicySpec("mps"), PolicySpec("myopic_oracle"), n=n, seeds=seeds, master_seed=master_seed
    )
    oracle_zero = report.baseline_cumulative == 0.0 and report.baseline_final == 0.0
    gap = abs(report.regret_final - 0.5)
    passed = oracle_zero and gap <= 0.03
    return CheckResult(
        "prop1-regret-half",
        passed,
        f"final regret {report.regret_final:.4f} (target 0.5 +/- 0.03), oracle penalty exactly 0: {oracle_zero}",
        {"regret_final": report.regret_final, "stderr_final": report.stderr_final},
    )


def check_thompson_reduction(num_envs: int = 1000, master_seed: int = 5) -> CheckResult:
    """On bandit penalties the posterior-sampling step is exact Thompson sampling."""
    from .policies import MPSPolicy

    mismatches = 0
    decisions = 0
    for i in range(num_envs):
        env = random_finite_env(i, num_theta=5, num_actions=6, num_outcomes=2, penalty_kind="bandit")
        post = DiscretePosterior(env.prior.copy())
        data = DataSequence.empty()
        walk_rng = substream(master_seed, i, "outcome", "setup")
        theta_w = env.draw_theta(walk_rng)
        for _ in range(int(walk_rng.integers(0, 3))):
            a = env.actions[int(walk_rng.integers(len(env.actions)))]
            data = data.append((a, env.sample_outcome(theta_w, a, walk_rng)))
            post = discrete_update(post, env, DataSequence((data.pairs[-1],)))
        policy = MPSPolicy(posterior=post, lookahead=LookaheadConfig())
        for d in range(3):
            rng = substream(master_seed, i, "policy", f"d{d}")
            rng_twin = substream(master_seed, i, "policy", f"d{d}")
            theta = sample_parameter(post, rng_twin)
            action = policy.step(env, data, rng, len(data) + 1)
            f = env.penalty.f_for(theta)
            decisions += 1
            if action.index != int(np.argmax(f)):
                mismatches += 1
    return CheckResult(
        "thompson-reduction",
        mismatches == 0,
        f"{decisions} decisions on {num_envs} random bandit environments, {mismatches} mismatches",
        {"decisions": decisions, "mismatches": mismatches},
    )


def check_theorem1_bound(ns=(8, 16, 32, 64), seeds: int = 500, master_seed: int = 23) -> CheckResult:
    """Measured Bayesian cumulative regret stays below the proved bound."""
    env = build_bandit(num_theta=8, num_actions=4)
    psi_cap = math.log(8)
    rows = []
    ok = True
    for n in ns:
        rep = analytics.bayes_regret(
            env, PolicySpec("mps"), PolicySpec("myopic_oracle"), n=n, seeds=seeds, master_seed=master_seed
        )
        bound = analytics.theorem1_bound(1.0, n, 4, psi_cap)
        measured = rep.regret_cumulative + 2 * rep.stderr_cumulative
        ok = ok and measured <= bound
        rows.append((n, rep.regret_cumulative, rep.stderr_cumulative, bound))
    detail = "; ".join(f"n={n}: regret {r:.3f}+2*{s:.3f} <= {b:.3f}" for n, r, s, b in rows)
    return CheckResult("theorem1-empirical-bound", ok, detail, {"rows": rows})


def check_valuedecomp(num_instances: int = 20, tol: float = 1e-10) -> CheckResult:
    """J(pi1) - J(pi2) equals the per-step decomposition through Q^{pi2}, exactly."""
    n = 3
    worst = 0.0
    for i in range(num_instances):
        env = random_finite_env(i, num_theta=2, num_actions=2, num_outcomes=2, penalty_kind="table")
        theta_star = i % env.num_theta
        cfg = LookaheadConfig()
        pairs = [
            (RandomPolicy(), MyopicOraclePolicy(theta_star, cfg)),
            (MyopicOraclePolicy(theta_star, cfg), GlobalOraclePolicy(theta_star, horizon=n)),
        ]
        for pi1, pi2 in pairs:
            j1 = analytics.expected_cumulative_penalty(env, theta_star, pi1, n)
            j2 = analytics.expected_cumulative_penalty(env, theta_star, pi2, n)
            decomp = _decomposition_sum(env, theta_star, pi1, pi2, n)
            worst = max(worst, abs((j1 - j2) - decomp))
    return CheckResult(
        "value-decomposition",
        worst <= tol,
        f"max |J-difference - decomposition| = {worst:.2e} over {num_instances} instances (tol {tol})",
        {"worst": worst},
    )


def _decomposition_sum(env, theta_star, pi1, pi2, n) -> float:
    """Sum over t of E_{D_{t-1} ~ pi1}[ E_{X~pi1} Q^{pi2} - E_{X~pi2} Q^{pi2} ]."""
    from .core import DiscreteOutcome

    total = 0.0
    frontier = [(DataSequence.empty(), 1.0)]
    for t in range(1, n + 1):
        for data, prob in frontier:
            d1 = pi1.action_distribution(env, data, t)
            d2 = pi2.action_distribution(env, data, t)
            inner = 0.0
            for dist, sign in ((d1, 1.0), (d2, -1.0)):
                for ai, pa in enumerate(dist):
                    if pa == 0.0:
                        continue
                    for yi, py in enumerate(env.likelihood[theta_star, ai]):
                        if py == 0.0:
                            continue
                        q = q_value(env, theta_star, data, env.actions[ai], DiscreteOutcome(yi), pi2, n)
                        inner += sign * pa * py * q
            total += prob * inner
        nxt = []
        for data, prob in frontier:
            dist = pi1.action_distribution(env, data, t)
            for ai, pa in enumerate(dist):
                if pa == 0.0:
                    continue
                for yi, py in enumerate(env.likelihood[theta_star, ai]):
                    if py == 0.0:
                        continue
                    nxt.append((data.append((env.actions[ai], DiscreteOutcome(yi))), prob * pa * py))
        frontier = nxt
    return total


def check_mig_suite() -> CheckResult:
    """Finite-cap, closed-form and growth-rate properties of the information gain."""
    problems = []
    # cap by the prior entropy on finite spaces
    for i in range(6):
        env = random_finite_env(100 + i, num_theta=3, num_actions=2, num_outcomes=2)
        rep = analytics.mig_exact(env, 3)
        if rep.psi_n > math.log(env.num_theta) + 1e-12:
            problems.append(f"cap violated on instance {i}")
    # single linear-Gaussian observation
    rep1 = analytics.mig_blr(np.array([[1.0]]), np.array([[1.0]]), 1.0, 1)
    if abs(rep1.psi_n - 0.5 * math.log(2)) > 1e-12:
        problems.append(f"single-observation value {rep1.psi_n} != ln(2)/2")
    # logarithmic growth for a random 4-dimensional design
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
    grid = rng.standard_normal((40, 4))
    psis = [analytics.mig_blr(grid, np.eye(4), 0.5, n).psi_n for n in (1, 2, 4, 8, 16, 32, 64, 128, 256, 512)]
    fitted_c = max(p / (4 * math.log(n + 1)) for p, n in zip(psis[:7], (1, 2, 4, 8, 16, 32, 64)))
    for p, n in zip(psis, (1, 2, 4, 8, 16, 32, 64, 128, 256, 512)):
        if p > fitted_c * 4 * math.log(n + 1) + 1e-9:
            problems.append(f"growth bound broken at n={n}")
    # chain rule on random instances
    for i in range(10):
        env = random_finite_env(200 + i, num_theta=2, num_actions=2, num_outcomes=2)
        pol = lambda k: MyopicOraclePolicy(k, LookaheadConfig())  # noqa: E731
        if not analytics.mi_chain_rule_check(env, pol, 3, tolerance=1e-10):
            problems.append(f"chain rule broken on instance {i}")
    passed = not problems
    return CheckResult("mig-suite", passed, "; ".join(problems) if problems else "all information-gain checks hold",
                       {"problems": problems})


def check_conditions_canonical(depth: int = 4) -> CheckResult:
    """The canonical instances certify or refute each structural condition."""
    problems = []
    bandit = build_bandit(num_theta=3, num_actions=3)
    rep = conditions.check_episodic(bandit, H=1, depth=depth)
    if not (rep.holds and rep.fitted_constant == 1.0):
        problems.append("bandit penalty failed the H=1 episodic check")
    elif conditions.derive_B(rep) != 1.0:
        problems.append("episodic H=1 did not derive B=1")

    lastpair = build_lastpair()
    rep = conditions.check_recoverability(lastpair, depth=depth)
    if not (rep.holds and rep.fitted_constant == 0.0):
        problems.append(f"last-pair penalty fitted alpha {rep.fitted_constant}, expected 0")

    bo = build_bo_det()
    rep = conditions.check_monotone_submodular(bo, depth=depth)
    if not rep.holds:
        problems.append("deterministic best-seen instance failed monotone/submodular")

    prop1 = build_prop1()
    rep = conditions.check_recoverability(prop1, depth=depth)
    if rep.holds:
        problems.append("forbidden-action instance unexpectedly satisfied recoverability")
    elif not conditions.replay_witness(prop1, rep):
        problems.append("recoverability witness did not replay")

    passed = not problems
    return CheckResult("conditions-canonical", passed,
                       "; ".join(problems) if problems else f"all condition checks exhaustive to depth {depth}",
                       {"problems": problems})


def check_greedy_vs_optimal(pairs=((2, 2), (4, 2), (4, 4))) -> CheckResult:
    """Myopic-vs-global final penalties obey the submodular approximation bound."""
    rows = []
    ok = True
    for env in (build_coverage(), build_bo_det()):
        for n, m in pairs:
            res = analytics.submodular_bound_check(env, 0, n, m)
            ok = ok and res["holds"]
            rows.append((env.name, n, m, res["lam_greedy_n"], res["lam_opt_m"], res["rhs"]))
    detail = "; ".join(f"{e}(n={n},m={m}): {g:.4f} <= {r:.4f}" for e, n, m, g, o, r in rows)
    return CheckResult("greedy-vs-optimal", ok, detail, {"rows": rows})


def check_pinsker(trials: int = 200, seed: int = 3) -> CheckResult:
    """|E_P f - E_Q f| <= B sqrt(KL(P||Q)/2) on random finite distributions."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    worst = -np.inf
    ok = True
    for _ in range(trials):
        k = int(rng.integers(2, 6))
        p = rng.dirichlet(np.ones(k))
        q = rng.dirichlet(np.ones(k))
        b = float(rng.uniform(0.5, 3.0))
        f = rng.uniform(0.0, b, size=k)
        lhs = abs(float(f @ p - f @ q))
        rhs = b * math.sqrt(analytics.kl_divergence(p, q) / 2.0)
        ok = ok and lhs <= rhs + 1e-12
        worst = max(worst, lhs - rhs)
    return CheckResult("pinsker-gap-bound", ok, f"max slack violation {worst:.2e} over {trials} trials", {})


def check_determinism(tmpdir: str, seeds: int = 4, n: int = 10) -> CheckResult:
    """Identical config and master seed reproduce byte-identical traces."""
    from pathlib import Path

    from .harness import CampaignConfig, run_campaign

    outs = []
    for tag in ("a", "b"):
        cfg = CampaignConfig(
            environment="prop1",
            policies=[PolicySpec("mps"), PolicySpec("myopic_oracle"), PolicySpec("rand")],
            n=n,
            seeds=seeds,
            master_seed=99,
            output_dir=str(Path(tmpdir) / tag),
        )
        run_campaign(cfg)
        outs.append((Path(tmpdir) / tag / "trace.csv").read_bytes())
    same = outs[0] == outs[1]
    return CheckResult("campaign-determinism", same,
                       "trace.csv byte-identical across reruns" if same else "trace bytes differ", {})


SUITES = {
    "prop1": check_prop1,
    "thompson": check_thompson_reduction,
    "theorem1": check_theorem1_bound,
    "valuedecomp": check_valuedecomp,
    "mig": check_mig_suite,
    "conditions": check_conditions_canonical,
    "greedyopt": check_greedy_vs_optimal,
    "pinsker": check_pinsker,
}

FAST_OVERRIDES = {
    "prop1": {"seeds": 300},
    "thompson": {"num_envs": 100},
    "theorem1": {"seeds": 60, "ns": (8, 16)},
    "valuedecomp": {"num_instances": 5},
}


def run_suites(names: list[str] | None = None, fast: bool = False) -> list[CheckResult]:
    chosen = names or list(SUITES)
    results = []
    for name in chosen:
        kwargs = FAST_OVERRIDES.get(name, {}) if fast else {}
        results.append(SUITES[name](**kwargs))
    return results
