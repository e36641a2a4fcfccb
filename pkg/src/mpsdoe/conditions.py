"""Exhaustive verifiers for the structural conditions on penalty functions.

All checks run on finite environments by exact enumeration of every data
sequence up to a depth; a failing report always carries a replayable witness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import DataSequence, DiscreteOutcome, EnumerationBoundError, FiniteEnvironment

SEQ_CAP = 200_000
TOL = 1e-12


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


@dataclass
class ConditionReport:
    condition: str  # Episodic | Recoverability | MoreDataBetter | MonotoneSubmodular
    holds: bool
    witness: dict | None
    fitted_constant: float | None
    search_depth: int
    binding: dict | None = None  # tightest enumerated pair, present even when holds

    def __post_init__(self):
        self.holds = bool(self.holds)
        if self.fitted_constant is not None:
            self.fitted_constant = float(self.fitted_constant)
        self.witness = _jsonable(self.witness)
        self.binding = _jsonable(self.binding)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "holds": self.holds,
            "witness": self.witness,
            "fitted_constant": self.fitted_constant,
            "search_depth": self.search_depth,
        }


def _seq_from_indices(env: FiniteEnvironment, items: list[list[int]]) -> DataSequence:
    pairs = tuple((env.actions[a], DiscreteOutcome(y)) for a, y in items)
    return DataSequence(pairs)


def _seq_to_indices(data: DataSequence) -> list[list[int]]:
    return [[a.index, y.index] for a, y in data]


def enumerate_sequences(env: FiniteEnvironment, max_len: int, include_empty: bool = True) -> list[DataSequence]:
    branching = len(env.actions) * env.num_outcomes
    total = sum(branching**t for t in range(max_len + 1))
    if total > SEQ_CAP:
        raise EnumerationBoundError(f"{total} sequences up to length {max_len} exceed the cap {SEQ_CAP}")
    pairs = [(a, DiscreteOutcome(y)) for a in env.actions for y in range(env.num_outcomes)]
    out = [DataSequence.empty()] if include_empty else []
    for t in range(1, max_len + 1):
        out.extend(DataSequence(combo) for combo in itertools.product(pairs, repeat=t))
    return out


def _penalty_supports_empty(env: FiniteEnvironment) -> bool:
    try:
        env.penalty.value(0, DataSequence.empty())
        return True
    except ValueError:
        return False


class _Evaluator:
    """Cached exact penalty and one-step-expectation evaluations."""

    def __init__(self, env: FiniteEnvironment):
        self.env = env
        self._val: dict = {}
        self._exp: dict = {}

    def value(self, theta: int, data: DataSequence) -> float:
        key = (theta, data.key())
        v = self._val.get(key)
        if v is None:
            v = self.env.penalty.value(theta, data)
            self._val[key] = v
        return v

    def expected_after(self, theta: int, data: DataSequence, action_index: int) -> float:
        key = (theta, data.key(), action_index)
        v = self._exp.get(key)
        if v is None:
            probs = self.env.likelihood[theta, action_index]
            v = sum(
                p * self.value(theta, data.append((self.env.actions[action_index], DiscreteOutcome(yi))))
                for yi, p in enumerate(probs)
                if p > 0.0
            )
            self._exp[key] = v
        return v

    def min_expected_after(self, theta: int, data: DataSequence) -> float:
        return min(self.expected_after(theta, data, ai) for ai in range(len(self.env.actions)))


def check_episodic(env: FiniteEnvironment, H: int, depth: int) -> ConditionReport:
    """Penalty depends only on the pairs of the current length-H episode."""
    ev = _Evaluator(env)
    seqs = enumerate_sequences(env, depth, include_empty=False)

    def holds_for(h: int) -> dict | None:
        for theta in range(env.num_theta):
            for seq in seqs:
                t = len(seq)
                start = ((t - 1) // h) * h
                suffix = DataSequence(seq.pairs[start:])
                full, suf = ev.value(theta, seq), ev.value(theta, suffix)
                if abs(full - suf) > TOL:
                    return {
                        "theta": theta,
                        "sequence": _seq_to_indices(seq),
                        "suffix": _seq_to_indices(suffix),
                        "value": full,
                        "suffix_value": suf,
                        "H": h,
                    }
        return None

    witness = holds_for(H)
    fitted = None
    for h in range(1, H + 1):
        if holds_for(h) is None:
            fitted = float(h)
            break
    return ConditionReport("Episodic", witness is None, witness, fitted, depth)


def check_recoverability(env: FiniteEnvironment, depth: int) -> ConditionReport:
    """One well-chosen action shrinks any realised penalty gap by a factor alpha < 1."""
    ev = _Evaluator(env)
    include_empty = _penalty_supports_empty(env)
    seqs = enumerate_sequences(env, depth, include_empty=include_empty)

    fitted = 0.0
    binding = None
    for theta in range(env.num_theta):
        vals = [(seq, ev.value(theta, seq)) for seq in seqs]
        mins = {seq.key(): ev.min_expected_after(theta, seq) for seq, _ in vals}
        for (d1, v1), (d2, v2) in itertools.product(vals, vals):
            eps = v1 - v2
            if eps <= TOL:
                continue
            needed = max(0.0, (mins[d1.key()] - mins[d2.key()]) / eps)
            if needed > fitted:
                fitted = needed
                binding = {
                    "theta": theta,
                    "d1": _seq_to_indices(d1),
                    "d2": _seq_to_indices(d2),
                    "eps": eps,
                    "min_after_d1": mins[d1.key()],
                    "min_after_d2": mins[d2.key()],
                    "required_alpha": needed,
                }
    holds = fitted < 1.0
    return ConditionReport("Recoverability", holds, None if holds else binding, fitted, depth, binding=binding)


def _myopic_rollout(env: FiniteEnvironment, ev: _Evaluator, theta: int, data: DataSequence,
                    steps: int, cache: dict) -> float:
    """Expected final penalty after the myopic oracle plays ``steps`` more actions."""
    if steps == 0:
        return ev.value(theta, data)
    key = (theta, data.key(), steps)
    v = cache.get(key)
    if v is not None:
        return v
    best_a, best_v = 0, np.inf
    for ai in range(len(env.actions)):
        e = ev.expected_after(theta, data, ai)
        if e < best_v:
            best_a, best_v = ai, e
    total = 0.0
    for yi, p in enumerate(env.likelihood[theta, best_a]):
        if p > 0.0:
            total += p * _myopic_rollout(env, ev, theta, data.append((env.actions[best_a], DiscreteOutcome(yi))),
                                         steps - 1, cache)
    cache[key] = total
    return total


def check_more_data_better(env: FiniteEnvironment, depth: int, k: int) -> ConditionReport:
    """Rolling the myopic oracle k steps from a longer history is no worse."""
    ev = _Evaluator(env)
    branching = len(env.actions) * env.num_outcomes
    if branching**k > SEQ_CAP:
        raise EnumerationBoundError(f"{k}-step rollouts branch beyond the cap")
    include_empty = _penalty_supports_empty(env)
    seqs = enumerate_sequences(env, depth, include_empty=include_empty)

    rollout_cache: dict = {}

    witness = None
    for theta in range(env.num_theta):
        for seq in seqs:
            e_full = _myopic_rollout(env, ev, theta, seq, k, rollout_cache)
            lo = 0 if include_empty else 1
            for t in range(lo, len(seq)):
                pre = seq.prefix(t)
                e_pre = _myopic_rollout(env, ev, theta, pre, k, rollout_cache)
                if e_full > e_pre + TOL:
                    witness = {
                        "theta": theta,
                        "prefix": _seq_to_indices(pre),
                        "sequence": _seq_to_indices(seq),
                        "k": k,
                        "rollout_from_prefix": e_pre,
                        "rollout_from_sequence": e_full,
                    }
                    break
            if witness:
                break
        if witness:
            break
    return ConditionReport("MoreDataBetter", witness is None, witness, None, depth)


def check_monotone_submodular(env: FiniteEnvironment, depth: int) -> ConditionReport:
    """Expected penalty never rises with one more pair, with diminishing one-step gains."""
    ev = _Evaluator(env)
    include_empty = _penalty_supports_empty(env)
    seqs = enumerate_sequences(env, depth, include_empty=include_empty)

    witness = None
    for theta in range(env.num_theta):
        for seq in seqs:
            base = ev.value(theta, seq)
            for ai in range(len(env.actions)):
                if ev.expected_after(theta, seq, ai) > base + TOL:
                    witness = {
                        "part": "monotone",
                        "theta": theta,
                        "sequence": _seq_to_indices(seq),
                        "action": ai,
                        "value": base,
                        "expected_after": ev.expected_after(theta, seq, ai),
                    }
                    break
            if witness:
                break
        if witness:
            break

    if witness is None:
        for theta in range(env.num_theta):
            for seq in seqs:
                base_full = ev.value(theta, seq)
                lo = 0 if include_empty else 1
                for t in range(lo, len(seq)):
                    pre = seq.prefix(t)
                    base_pre = ev.value(theta, pre)
                    for ai in range(len(env.actions)):
                        gain_pre = base_pre - ev.expected_after(theta, pre, ai)
                        gain_full = base_full - ev.expected_after(theta, seq, ai)
                        if gain_pre < gain_full - TOL:
                            witness = {
                                "part": "submodular",
                                "theta": theta,
                                "prefix": _seq_to_indices(pre),
                                "sequence": _seq_to_indices(seq),
                                "action": ai,
                                "gain_from_prefix": gain_pre,
                                "gain_from_sequence": gain_full,
                            }
                            break
                    if witness:
                        break
                if witness:
                    break
            if witness:
                break
    return ConditionReport("MonotoneSubmodular", witness is None, witness, None, depth)


def derive_B(report: ConditionReport) -> float:
    """Per-step damage constant implied by a verified condition."""
    if not report.holds:
        raise ValueError(f"condition {report.condition} does not hold; no constant available")
    if report.condition == "Episodic":
        return float(report.fitted_constant)
    if report.condition == "Recoverability":
        return 1.0 / (1.0 - report.fitted_constant)
    if report.condition == "MoreDataBetter":
        return 2.0
    raise ValueError(f"no constant rule for condition {report.condition}")


def replay_witness(env: FiniteEnvironment, report: ConditionReport) -> bool:
    """Re-evaluate a failing report's witness; True iff the violation reproduces."""
    w = report.witness
    if w is None:
        return False
    ev = _Evaluator(env)
    if report.condition == "Episodic":
        seq = _seq_from_indices(env, w["sequence"])
        suffix = _seq_from_indices(env, w["suffix"])
        return abs(ev.value(w["theta"], seq) - ev.value(w["theta"], suffix)) > TOL
    if report.condition == "Recoverability":
        d1 = _seq_from_indices(env, w["d1"])
        d2 = _seq_from_indices(env, w["d2"])
        eps = ev.value(w["theta"], d1) - ev.value(w["theta"], d2)
        if eps <= TOL:
            return False
        needed = (ev.min_expected_after(w["theta"], d1) - ev.min_expected_after(w["theta"], d2)) / eps
        return needed >= 1.0 - TOL
    if report.condition == "MoreDataBetter":
        pre = _seq_from_indices(env, w["prefix"])
        seq = _seq_from_indices(env, w["sequence"])
        cache: dict = {}
        e_pre = _myopic_rollout(env, ev, w["theta"], pre, w["k"], cache)
        e_full = _myopic_rollout(env, ev, w["theta"], seq, w["k"], cache)
        return e_full > e_pre + TOL
    if report.condition == "MonotoneSubmodular":
        if w["part"] == "monotone":
            seq = _seq_from_indices(env, w["sequence"])
            return ev.expected_after(w["theta"], seq, w["action"]) > ev.value(w["theta"], seq) + TOL
        pre = _seq_from_indices(env, w["prefix"])
        seq = _seq_from_indices(env, w["sequence"])
        gain_pre = ev.value(w["theta"], pre) - ev.expected_after(w["theta"], pre, w["action"])
        gain_full = ev.value(w["theta"], seq) - ev.expected_after(w["theta"], seq, w["action"])
        return gain_pre < gain_full - TOL
    return False


def standard_condition_reports(env: FiniteEnvironment, depth: int = 4, k: int = 2, H: int = 1) -> dict:
    """All four condition checks at one depth, as JSON-ready dictionaries."""
    reports = [
        check_episodic(env, H, depth),
        check_recoverability(env, depth),
        check_more_data_better(env, depth, k),
        check_monotone_submodular(env, depth),
    ]
    return {r.condition: r.to_dict() for r in reports}
