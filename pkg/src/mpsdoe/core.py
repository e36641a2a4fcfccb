"""Shared domain types: actions, outcomes, data sequences and environments.

Everything here is immutable after construction and safe to share across
concurrent workers. Operations on data sequences return new sequences.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence

import numpy as np

PROB_TOL = 1e-12


class DegeneratePosteriorError(RuntimeError):
    """All posterior mass vanished (data impossible under every parameter)."""


class EnumerationBoundError(RuntimeError):
    """An exhaustive computation would exceed the configured size cap."""


class EstimatorDivergenceError(RuntimeError):
    """An iterative estimator produced non-finite values."""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


class CatalogError(KeyError):
    """Unknown environment id requested from the catalog."""


@dataclass(frozen=True)
class Action:
    """A grid point the decision maker can query: grid index plus coordinates."""

    index: int
    coords: tuple[float, ...]

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"action index must be non-negative, got {self.index}")


@dataclass(frozen=True)
class DiscreteOutcome:
    """Outcome from a finite outcome space, stored as an index into it."""

    index: int


@dataclass(frozen=True)
class RealOutcome:
    """Real-valued (possibly vector) outcome."""

    values: tuple[float, ...]

    @property
    def scalar(self) -> float:
        return self.values[0]


Outcome = DiscreteOutcome | RealOutcome
Pair = tuple[Action, Outcome]


def outcome_key(outcome: Outcome) -> tuple:
    """Hashable canonical form of an outcome."""
    if isinstance(outcome, DiscreteOutcome):
        return ("d", outcome.index)
    return ("r", outcome.values)


class DataSequence:
    """Ordered multiset of (action, outcome) pairs, immutable.

    ``append`` returns a new sequence sharing no mutable state with the old
    one, which makes memoised penalty evaluation safe.
    """

    __slots__ = ("pairs", "action_indices")

    def __init__(self, pairs: tuple[Pair, ...] = ()):
        self.pairs = tuple(pairs)
        self.action_indices = tuple(a.index for a, _ in self.pairs)

    @classmethod
    def empty(cls) -> "DataSequence":
        return cls(())

    def append(self, pair: Pair) -> "DataSequence":
        return DataSequence(self.pairs + (pair,))

    def prefix(self, t: int) -> "DataSequence":
        if t < 0 or t > len(self.pairs):
            raise IndexError(f"prefix length {t} out of range for sequence of length {len(self.pairs)}")
        return DataSequence(self.pairs[:t])

    def last(self) -> Pair:
        if not self.pairs:
            raise ValueError("empty data sequence has no last pair")
        return self.pairs[-1]

    def key(self) -> tuple:
        """Hashable canonical form, usable as a memoisation key."""
        return tuple((a.index, outcome_key(y)) for a, y in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def __getitem__(self, t: int) -> Pair:
        return self.pairs[t]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DataSequence) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"DataSequence(len={len(self.pairs)})"

    def to_json(self) -> str:
        records = []
        for a, y in self.pairs:
            if isinstance(y, DiscreteOutcome):
                records.append({"action_index": a.index, "outcome": y.index})
            else:
                records.append({"action_index": a.index, "outcome": list(y.values)})
        return json.dumps(records)

    @classmethod
    def from_json(cls, text: str, actions: Sequence[Action]) -> "DataSequence":
        pairs = []
        for rec in json.loads(text):
            a = actions[rec["action_index"]]
            raw = rec["outcome"]
            y: Outcome = DiscreteOutcome(raw) if isinstance(raw, int) else RealOutcome(tuple(raw))
            pairs.append((a, y))
        return cls(tuple(pairs))


def concat(data: DataSequence, pair: Pair) -> DataSequence:
    """Append one (action, outcome) pair, returning a new sequence."""
    return data.append(pair)


def prefix(data: DataSequence, t: int) -> DataSequence:
    """First ``t`` pairs in order. Raises IndexError if t exceeds the length."""
    return data.prefix(t)


def is_prefix(data: DataSequence, other: DataSequence) -> bool:
    """True iff ``data`` is a (non-strict) prefix of ``other``."""
    return len(data) <= len(other) and other.pairs[: len(data)] == data.pairs


@dataclass
class TrueInstance:
    """A realised problem instance: the hidden true parameter plus its seed."""

    theta_star: Any
    rng_seed: int


@dataclass
class InferenceSpec:
    """Which posterior family the harness should maintain for an environment."""

    kind: str  # "discrete" | "blr" | "gp" | "particle" | "gp_multi"
    params: dict = field(default_factory=dict)


def _validate_probability_vector(p: np.ndarray, what: str) -> None:
    if np.any(p < -PROB_TOL):
        raise ValueError(f"{what} has negative entries")
    if abs(float(p.sum()) - 1.0) > PROB_TOL:
        raise ValueError(f"{what} sums to {float(p.sum())!r}, not 1 within {PROB_TOL}")


@dataclass
class FiniteEnvironment:
    """Finite parameter, action and outcome spaces with an explicit likelihood table.

    Parameters are referred to by index into ``theta_labels``; ``likelihood``
    has shape (K, |X|, |Y|) with each row a probability vector over outcomes.
    """

    name: str
    theta_labels: Sequence[Any]
    prior: np.ndarray
    actions: tuple[Action, ...]
    likelihood: np.ndarray
    penalty: "Any"
    outcome_values: np.ndarray | None = None
    horizon_hint: int | None = None
    fixed_theta_star: int | None = None
    inference: InferenceSpec = field(default_factory=lambda: InferenceSpec("discrete"))

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=float)
        self.likelihood = np.asarray(self.likelihood, dtype=float)
        k, a, y = self.likelihood.shape
        if k != len(self.theta_labels) or a != len(self.actions):
            raise ValueError("likelihood table shape inconsistent with parameter/action spaces")
        _validate_probability_vector(self.prior, "prior")
        for ki in range(k):
            for ai in range(a):
                _validate_probability_vector(self.likelihood[ki, ai], f"likelihood row (theta={ki}, x={ai})")
        if self.fixed_theta_star is not None and not (0 <= self.fixed_theta_star < k):
            raise ValueError("fixed_theta_star outside parameter space")

    @property
    def is_finite(self) -> bool:
        return True

    @property
    def num_theta(self) -> int:
        return len(self.theta_labels)

    @property
    def num_outcomes(self) -> int:
        return self.likelihood.shape[2]

    def draw_theta(self, rng: np.random.Generator) -> int:
        if self.fixed_theta_star is not None:
            return self.fixed_theta_star
        return int(rng.choice(self.num_theta, p=self.prior))

    def sample_outcome(self, theta: int, action: Action, rng: np.random.Generator) -> DiscreteOutcome:
        return DiscreteOutcome(int(rng.choice(self.num_outcomes, p=self.likelihood[theta, action.index])))


@dataclass
class ContinuousEnvironment:
    """Continuous outcome space with a Gaussian observation model.

    ``mean_fn(theta, action_indices)`` gives observation means for one
    parameter at a batch of grid actions; ``mean_batch(thetas, action_index)``
    gives means for a batch of parameters at one action (particle updates).
    ``noise_scale(theta)`` is the observation standard deviation (scalar, or
    one per outcome component). Outcomes are RealOutcome vectors of dimension
    ``outcome_dim``.
    """

    name: str
    actions: tuple[Action, ...]
    prior_sampler: Callable[[np.random.Generator], np.ndarray]
    mean_fn: Callable[[Any, np.ndarray], np.ndarray]
    noise_scale: Callable[[Any], np.ndarray | float]
    penalty: "Any"
    inference: InferenceSpec
    outcome_dim: int = 1
    mean_batch: Callable[[np.ndarray, int], np.ndarray] | None = None
    noise_scale_batch: Callable[[np.ndarray], np.ndarray] | None = None
    log_prior_batch: Callable[[np.ndarray], np.ndarray] | None = None
    horizon_hint: int | None = None
    fixed_theta_star: Any | None = None

    @property
    def is_finite(self) -> bool:
        return False

    def draw_theta(self, rng: np.random.Generator) -> Any:
        if self.fixed_theta_star is not None:
            return self.fixed_theta_star
        return self.prior_sampler(rng)

    def outcome_from_normals(self, theta: Any, action_index: int, z: np.ndarray) -> np.ndarray:
        """Map standard normal draws (m, outcome_dim) to outcome values (CRN-friendly)."""
        mu = np.asarray(self.mean_fn(theta, np.array([action_index])), dtype=float)
        mu = mu.reshape(-1)  # (outcome_dim,) for a single action
        scale = np.asarray(self.noise_scale(theta), dtype=float)
        return mu[None, :] + z * scale

    def sample_outcome(self, theta: Any, action: Action, rng: np.random.Generator) -> RealOutcome:
        z = rng.standard_normal((1, self.outcome_dim))
        y = self.outcome_from_normals(theta, action.index, z)[0]
        return RealOutcome(tuple(float(v) for v in y))

    def log_likelihood_batch(self, thetas: np.ndarray, action_index: int, y: np.ndarray) -> np.ndarray:
        """Gaussian log density of outcome ``y`` at one action, for a batch of parameters."""
        if self.mean_batch is None:
            raise NotImplementedError(f"environment {self.name} has no batched mean function")
        mu = np.asarray(self.mean_batch(thetas, action_index), dtype=float)
        if mu.ndim == 1:
            mu = mu[:, None]
        if self.noise_scale_batch is not None:
            scales = np.asarray(self.noise_scale_batch(thetas), dtype=float)
        else:
            scales = np.asarray([self.noise_scale(th) for th in thetas], dtype=float)
        if scales.ndim == 1:
            scales = scales[:, None]
        resid = (np.asarray(y, dtype=float)[None, :] - mu) / scales
        return -0.5 * np.sum(resid**2 + np.log(2 * math.pi * scales**2), axis=1)


Environment = FiniteEnvironment | ContinuousEnvironment


def make_grid_actions(bounds: Sequence[tuple[float, float]], points_per_dim: int) -> tuple[Action, ...]:
    """Uniform grid over a box, flattened in row-major order."""
    axes = [np.linspace(lo, hi, points_per_dim) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    return tuple(Action(i, tuple(float(v) for v in c)) for i, c in enumerate(coords))


def default_grid_size(dim: int) -> int:
    """Grid sizes used for 1-, 2- and 3-dimensional action domains."""
    return {1: 100, 2: 2500, 3: 27000}.get(dim, 100)
