"""Command-line interface: campaigns, condition checks, information gain, verification."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytics, conditions, verify
from .catalog import catalog_environment, catalog_ids
from .harness import CampaignConfig, run_campaign


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=str, default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")


def cmd_run(args) -> int:
    if args.config:
        config = CampaignConfig.from_yaml(args.config)
    elif args.env:
        policies = [{"kind": k} for k in (args.policies or "mps,rand").split(",")]
        config = CampaignConfig.from_dict(
            {"environment": args.env, "policies": policies, "n": args.n, "seeds": args.seeds}
        )
    else:
        print("error: provide --config or --env", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.master_seed = args.seed
    if args.out is not None:
        config.output_dir = args.out
    if args.workers is not None:
        config.workers = args.workers
    result = run_campaign(config)
    summary = result["summary"]
    for pid in summary["policies"]:
        stats = summary["per_policy"][pid]
        if stats.get("incomplete"):
            print(f"{pid}: incomplete")
            continue
        print(
            f"{pid}: final {stats['final_mean']:.4f} +/- {stats['final_stderr']:.4f}   "
            f"cumulative {stats['cumulative_mean']:.4f} +/- {stats['cumulative_stderr']:.4f}"
        )
    if summary["failures"]:
        print(f"{len(summary['failures'])} runs failed", file=sys.stderr)
        return 1
    return 0


def cmd_catalog(args) -> int:
    for name, desc in catalog_ids():
        print(f"{name:15s} {desc}")
    return 0


def cmd_check_conditions(args) -> int:
    env = catalog_environment(args.env, json.loads(args.overrides) if args.overrides else None)
    if not env.is_finite:
        print("error: condition checks are certified only on finite environments", file=sys.stderr)
        return 2
    reports = conditions.standard_condition_reports(env, depth=args.depth, k=args.k, H=args.episode_length)
    text = json.dumps(reports, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "conditions.json").write_text(text)
    print(text)
    return 0


def cmd_mig(args) -> int:
    env = catalog_environment(args.env, json.loads(args.overrides) if args.overrides else None)
    if not env.is_finite:
        print("error: the information-gain search runs on finite environments", file=sys.stderr)
        return 2
    fn = analytics.mig_exact if args.method == "exact" else analytics.mig_greedy
    report = fn(env, args.n)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "mig.json").write_text(text)
    print(text)
    return 0


def cmd_verify(args) -> int:
    names = args.suite.split(",") if args.suite else None
    results = verify.run_suites(names, fast=args.fast)
    failed = 0
    for res in results:
        print(res.line())
        failed += not res.passed
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mpsdoe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a seeded campaign")
    p_run.add_argument("--config", type=str, default=None, help="YAML campaign config")
    p_run.add_argument("--env", type=str, default=None, help="catalog environment id (inline mode)")
    p_run.add_argument("--policies", type=str, default=None, help="comma-separated policy kinds")
    p_run.add_argument("--n", type=int, default=20)
    p_run.add_argument("--seeds", type=int, default=10)
    p_run.add_argument("--workers", type=int, default=None)
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cat = sub.add_parser("catalog", help="list catalog environments")
    p_cat.set_defaults(func=cmd_catalog)

    p_cond = sub.add_parser("check-conditions", help="run the structural-condition verifiers")
    p_cond.add_argument("--env", type=str, required=True)
    p_cond.add_argument("--overrides", type=str, default=None, help="JSON overrides")
    p_cond.add_argument("--depth", type=int, default=4)
    p_cond.add_argument("--k", type=int, default=2)
    p_cond.add_argument("--episode-length", type=int, default=1)
    _add_common(p_cond)
    p_cond.set_defaults(func=cmd_check_conditions)

    p_mig = sub.add_parser("mig", help="maximum information gain of an environment")
    p_mig.add_argument("--env", type=str, required=True)
    p_mig.add_argument("--overrides", type=str, default=None)
    p_mig.add_argument("--n", type=int, default=3)
    p_mig.add_argument("--method", choices=["exact", "greedy"], default="exact")
    _add_common(p_mig)
    p_mig.set_defaults(func=cmd_mig)

    p_ver = sub.add_parser("verify", help="run the verification suites")
    p_ver.add_argument("--suite", type=str, default=None, help="comma-separated suite names")
    p_ver.add_argument("--fast", action="store_true", help="reduced sample sizes")
    p_ver.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
