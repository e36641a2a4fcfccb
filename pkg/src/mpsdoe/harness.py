"""Campaign execution: seeded runs, per-step traces, CSV/JSON emission.

Random-number streams are counter-based (Philox) and keyed by content:
(master seed, policy id, seed index, purpose). Results therefore do not
depend on execution order, worker count, or which other policies run in the
same campaign. The true-parameter stream is keyed without the policy id so
paired comparisons across policies share their true-parameter draws.
"""
from __future__ import annotations

import csv
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .catalog import catalog_environment
from .core import DataSequence, DiscreteOutcome, Environment
from .inference import initial_posterior, update_posterior
from .lookahead import LookaheadConfig
from .policies import GlobalOraclePolicy, MPSPolicy, MyopicOraclePolicy, Policy, RandomPolicy

_PURPOSE = {"theta": 0, "posterior": 1, "policy": 2, "outcome": 3}
_MASK = (1 << 63) - 1


def substream(master_seed: int, seed_index: int, purpose: str, policy_id: str | None = None) -> np.random.Generator:
    """Independent counter-based stream for one (run, purpose) combination."""
    entropy = [master_seed & _MASK, seed_index, _PURPOSE[purpose]]
    if policy_id is not None:
        entropy.append(zlib.crc32(policy_id.encode()))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass
class PolicySpec:
    kind: str  # mps | myopic_oracle | global_oracle | rand
    label: str | None = None
    params: dict = field(default_factory=dict)

    @property
    def policy_id(self) -> str:
        return self.label or self.kind

    def to_dict(self) -> dict:
        return {"kind": self.kind, "label": self.label, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicySpec":
        d = dict(d)
        kind = d.pop("kind")
        label = d.pop("label", None)
        params = d.pop("params", {})
        params.update(d)  # tolerate flat style: {kind: global_oracle, horizon: 4}
        return cls(kind, label, params)


@dataclass
class EmitFlags:
    per_step_csv: bool = True
    summary_json: bool = True
    condition_reports: bool = False


@dataclass
class CampaignConfig:
    environment: str
    policies: list[PolicySpec]
    n: int
    seeds: int
    master_seed: int = 0
    overrides: dict = field(default_factory=dict)
    lookahead: LookaheadConfig = field(default_factory=LookaheadConfig)
    output_dir: str | None = None
    emit: EmitFlags = field(default_factory=EmitFlags)
    workers: int = 1

    def __post_init__(self):
        if self.seeds < 1 or self.n < 1:
            raise ValueError("need seeds >= 1 and n >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        env = d["environment"]
        if isinstance(env, dict):
            env_id, overrides = env["id"], env.get("overrides", {})
        else:
            env_id, overrides = env, d.get("overrides", {})
        la = d.get("lookahead", {})
        emit = d.get("emit", {})
        return cls(
            environment=env_id,
            policies=[PolicySpec.from_dict(p) for p in d["policies"]],
            n=int(d["n"]),
            seeds=int(d["seeds"]),
            master_seed=int(d.get("master_seed", 0)),
            overrides=overrides,
            lookahead=LookaheadConfig(**la),
            output_dir=d.get("output_dir"),
            emit=EmitFlags(**emit),
            workers=int(d.get("workers", 1)),
        )

    @classmethod
    def from_yaml(cls, path: str | Path) -> "CampaignConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))


@dataclass
class StepTrace:
    t: int
    action_index: int
    outcome: object
    penalty: float
    penalty_raw: float
    cumulative: float


@dataclass
class RunRecord:
    run_id: str
    seed: int
    policy_id: str
    theta_star: object
    trace: list[StepTrace]
    cumulative: float
    final: float
    wall_time: float = field(compare=False, default=0.0)

    def per_step_penalties(self) -> np.ndarray:
        return np.array([row.penalty for row in self.trace])


def build_policy(spec: PolicySpec, theta_star, lookahead: LookaheadConfig, posterior, n: int) -> Policy:
    if spec.kind == "mps":
        return MPSPolicy(posterior=posterior, lookahead=lookahead, policy_id=spec.policy_id)
    if spec.kind == "myopic_oracle":
        return MyopicOraclePolicy(theta_star=theta_star, lookahead=lookahead, policy_id=spec.policy_id)
    if spec.kind == "global_oracle":
        return GlobalOraclePolicy(
            theta_star=theta_star,
            horizon=int(spec.params.get("horizon", n)),
            optimize_cumulative=bool(spec.params.get("optimize_cumulative", False)),
            policy_id=spec.policy_id,
        )
    if spec.kind == "rand":
        return RandomPolicy(policy_id=spec.policy_id)
    raise ValueError(f"unknown policy kind {spec.kind!r}")


def _serialise_theta(theta) -> object:
    if isinstance(theta, (int, np.integer)):
        return int(theta)
    return np.asarray(theta, dtype=float).tolist()


def run_one(
    env: Environment,
    policy_spec: PolicySpec,
    n: int,
    seed_index: int,
    master_seed: int,
    lookahead: LookaheadConfig | None = None,
) -> RunRecord:
    """One seeded run: draw the truth, execute the sample-act-observe-update loop."""
    lookahead = lookahead or LookaheadConfig()
    pid = policy_spec.policy_id
    theta_rng = substream(master_seed, seed_index, "theta")
    policy_rng = substream(master_seed, seed_index, "policy", pid)
    outcome_rng = substream(master_seed, seed_index, "outcome", pid)

    theta_star = env.draw_theta(theta_rng)
    posterior = None
    posterior_rng = None
    if policy_spec.kind == "mps":
        posterior_rng = substream(master_seed, seed_index, "posterior", pid)
        posterior = initial_posterior(env, posterior_rng)
    policy = build_policy(policy_spec, theta_star, lookahead, posterior, n)

    start = time.perf_counter()
    data = DataSequence.empty()
    trace: list[StepTrace] = []
    cum = 0.0
    for t in range(1, n + 1):
        action = policy.step(env, data, policy_rng, t)
        outcome = env.sample_outcome(theta_star, action, outcome_rng)
        pair = (action, outcome)
        data = data.append(pair)
        if policy_spec.kind == "mps":
            policy.posterior = update_posterior(policy.posterior, env, pair, posterior_rng)
        pen = env.penalty.value(theta_star, data)
        raw = env.penalty.raw(theta_star, data)
        cum += pen
        out_repr = outcome.index if isinstance(outcome, DiscreteOutcome) else list(outcome.values)
        trace.append(StepTrace(t, action.index, out_repr, pen, raw, cum))
    elapsed = time.perf_counter() - start

    return RunRecord(
        run_id=f"{pid}:{seed_index}",
        seed=seed_index,
        policy_id=pid,
        theta_star=_serialise_theta(theta_star),
        trace=trace,
        cumulative=cum,
        final=trace[-1].penalty,
        wall_time=elapsed,
    )


def _run_job(args) -> RunRecord:
    env_id, overrides, spec_dict, n, seed, master_seed, la_dict = args
    env = catalog_environment(env_id, overrides)
    return run_one(env, PolicySpec.from_dict(spec_dict), n, seed, master_seed, LookaheadConfig(**la_dict))


def run_campaign(config: CampaignConfig, env: Environment | None = None) -> dict:
    """Execute seeds x policies runs and emit trace/summary files.

    Returns {"records": [...], "summary": {...}}.
    """
    started = time.perf_counter()
    if env is None:
        env = catalog_environment(config.environment, config.overrides)

    jobs = [(spec, seed) for spec in config.policies for seed in range(config.seeds)]
    records: list[RunRecord] = []
    failures: list[dict] = []
    if config.workers > 1:
        la = {"mc_samples": config.lookahead.mc_samples, "exact_when_finite": config.lookahead.exact_when_finite}
        payload = [
            (config.environment, config.overrides, spec.to_dict(), config.n, seed, config.master_seed, la)
            for spec, seed in jobs
        ]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_job, payload))
    else:
        for spec, seed in jobs:
            try:
                records.append(run_one(env, spec, config.n, seed, config.master_seed, config.lookahead))
            except Exception as exc:  # noqa: BLE001 - recorded, campaign continues
                failures.append({"policy": spec.policy_id, "seed": seed, "error": repr(exc)})

    records.sort(key=lambda r: ([s.policy_id for s in config.policies].index(r.policy_id), r.seed))
    summary = summarise(config, records, failures, time.perf_counter() - started)

    if config.output_dir:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if config.emit.per_step_csv:
            write_trace_csv(records, out / "trace.csv")
        if config.emit.summary_json:
            with open(out / "summary.json", "w") as fh:
                json.dump(summary, fh, indent=2, sort_keys=True)
        if config.emit.condition_reports and env.is_finite:
            from .conditions import standard_condition_reports

            with open(out / "conditions.json", "w") as fh:
                json.dump(standard_condition_reports(env), fh, indent=2, sort_keys=True)
    return {"records": records, "summary": summary}


def _mean_stderr(rows: np.ndarray) -> tuple[list[float], list[float]]:
    mean = rows.mean(axis=0)
    if rows.shape[0] > 1:
        se = rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0])
    else:
        se = np.zeros(rows.shape[1])
    return mean.tolist(), se.tolist()


def summarise(config: CampaignConfig, records: list[RunRecord], failures: list[dict], elapsed: float) -> dict:
    per_policy: dict[str, dict] = {}
    for spec in config.policies:
        pid = spec.policy_id
        recs = [r for r in records if r.policy_id == pid]
        if not recs:
            per_policy[pid] = {"incomplete": True}
            continue
        pens = np.stack([r.per_step_penalties() for r in recs])  # (runs, n)
        cums = np.cumsum(pens, axis=1)
        pen_mean, pen_se = _mean_stderr(pens)
        cum_mean, cum_se = _mean_stderr(cums)
        finals = pens[:, -1]
        totals = cums[:, -1]
        per_policy[pid] = {
            "runs": len(recs),
            "per_step": [
                {"t": t + 1, "final_mean": pen_mean[t], "final_stderr": pen_se[t],
                 "cum_mean": cum_mean[t], "cum_stderr": cum_se[t]}
                for t in range(pens.shape[1])
            ],
            "final_mean": float(finals.mean()),
            "final_stderr": float(np.std(finals, ddof=1) / math.sqrt(len(finals))) if len(finals) > 1 else 0.0,
            "cumulative_mean": float(totals.mean()),
            "cumulative_stderr": float(np.std(totals, ddof=1) / math.sqrt(len(totals))) if len(totals) > 1 else 0.0,
        }
    return {
        "environment": config.environment,
        "overrides": config.overrides,
        "n": config.n,
        "seeds": config.seeds,
        "master_seed": config.master_seed,
        "policies": [s.policy_id for s in config.policies],
        "per_policy": per_policy,
        "failures": failures,
        "timing": {"wall_time_s": elapsed},
    }


def write_trace_csv(records: list[RunRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_id", "seed", "policy", "t", "action", "outcome", "penalty", "penalty_raw", "cum_penalty"])
        for rec in records:
            for row in rec.trace:
                out = row.outcome if isinstance(row.outcome, int) else json.dumps(row.outcome)
                writer.writerow([
                    rec.run_id, rec.seed, rec.policy_id, row.t, row.action_index, out,
                    repr(row.penalty), repr(row.penalty_raw), repr(row.cumulative),
                ])


def recompute_summary_from_csv(path: str | Path) -> dict:
    """Recompute per-policy per-step means from an emitted trace, for cross-checks."""
    rows: dict[str, dict[int, list[float]]] = {}
    with open(path) as fh:
        for rec in csv.DictReader(fh):
            pid = rec["policy"]
            t = int(rec["t"])
            rows.setdefault(pid, {}).setdefault(t, []).append(float(rec["penalty"]))
    out: dict[str, dict] = {}
    for pid, by_t in rows.items():
        out[pid] = {t: float(np.mean(v)) for t, v in sorted(by_t.items())}
    return out
