"""Posterior representations and updates.

Exact discrete Bayes for finite parameter spaces, conjugate Bayesian linear
regression, Gaussian-process regression, and a sequential Monte Carlo particle
posterior for models without tractable updates. Posterior values are
immutable snapshots; every update returns a new value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    Action,
    ContinuousEnvironment,
    DataSequence,
    DegeneratePosteriorError,
    Environment,
    FiniteEnvironment,
    Pair,
)
from .estimators import RBFKernel

GP_JITTER = 1e-8


@dataclass(frozen=True)
class DiscretePosterior:
    """Probability vector over a finite parameter space."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("posterior weights must be non-negative and sum to 1")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(len(self.weights), p=self.weights))


@dataclass(frozen=True)
class GaussianPosterior:
    """Multivariate Gaussian over a real parameter vector."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.mean, dtype=float))
        c = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "covariance", c)
        if np.max(np.abs(c - c.T)) > 1e-10:
            raise ValueError("covariance not symmetric")
        if np.linalg.eigvalsh(c).min() < -1e-10:
            raise ValueError("covariance has eigenvalue below -1e-10")

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if np.allclose(self.covariance, 0.0):
            return self.mean.copy()
        jitter = 1e-12 * max(1.0, float(np.trace(self.covariance)))
        chol = np.linalg.cholesky(self.covariance + jitter * np.eye(len(self.mean)))
        return self.mean + chol @ rng.standard_normal(len(self.mean))


@dataclass(frozen=True)
class GPPosterior:
    """Gaussian-process regression posterior over functions on the action grid."""

    kernel: RBFKernel
    noise_var: float
    grid: np.ndarray  # (G, d) coordinates the posterior is realised on
    data: DataSequence
    component: int = 0  # which outcome component carries this process's observations

    def _training(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.array(self.data.action_indices, dtype=int)
        ys = np.array([y.values[self.component] for _, y in self.data], dtype=float)
        return idx, ys

    def _factorisation(self):
        idx, ys = self._training()
        xtr = self.grid[idx]
        gram = self.kernel(xtr, xtr) + (self.noise_var + GP_JITTER) * np.eye(len(idx))
        try:
            cho = scipy.linalg.cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("GP Gram matrix not positive definite after jitter") from exc
        return idx, ys, cho

    def add_observation(self, pair: Pair) -> "GPPosterior":
        return GPPosterior(self.kernel, self.noise_var, self.grid, self.data.append(pair), self.component)

    def joint_on_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and covariance realised jointly on the grid."""
        prior = self.kernel(self.grid, self.grid)
        if len(self.data) == 0:
            return np.zeros(len(self.grid)), prior
        idx, ys, cho = self._factorisation()
        k_gt = prior[:, idx]
        mean = k_gt @ scipy.linalg.cho_solve(cho, ys)
        cov = prior - k_gt @ scipy.linalg.cho_solve(cho, k_gt.T)
        return mean, cov

    def sample_function(self, rng: np.random.Generator) -> np.ndarray:
        """One coherent function draw on the whole grid (never pointwise)."""
        mean, cov = self.joint_on_grid()
        chol = np.linalg.cholesky(cov + GP_JITTER * np.eye(len(mean)))
        return mean + chol @ rng.standard_normal(len(mean))


def gp_predict(gp: GPPosterior, x: Action) -> tuple[float, float]:
    """Posterior predictive mean and variance at one action (variance clamped at 0)."""
    xq = np.asarray(x.coords, dtype=float)[None, :]
    if len(gp.data) == 0:
        return 0.0, float(gp.kernel.signal_var)
    idx, ys, cho = gp._factorisation()
    k_qt = gp.kernel(xq, gp.grid[idx])[0]
    mean = float(k_qt @ scipy.linalg.cho_solve(cho, ys))
    var = float(gp.kernel.signal_var - k_qt @ scipy.linalg.cho_solve(cho, k_qt))
    return mean, max(var, 0.0)


@dataclass(frozen=True)
class ParticlePosterior:
    """Weighted particle cloud over a continuous parameter space.

    ``data`` carries the conditioning history so rejuvenation moves can
    target the full posterior.
    """

    particles: np.ndarray  # (N, p)
    weights: np.ndarray  # (N,), sums to 1
    ess_threshold: float = 0.5
    data: DataSequence = DataSequence.empty()
    rejuvenation_moves: int = 2

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "particles", np.asarray(self.particles, dtype=float))
        if not (0.0 < self.ess_threshold <= 1.0):
            raise ValueError("ess_threshold must lie in (0, 1]")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("particle weights must sum to 1")

    @property
    def ess(self) -> float:
        return 1.0 / float(np.sum(self.weights**2))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        i = int(rng.choice(len(self.weights), p=self.weights))
        return self.particles[i].copy()

    def mean(self) -> np.ndarray:
        return self.weights @ self.particles


@dataclass(frozen=True)
class MultiGPPosterior:
    """Independent GP posteriors over the components of a vector-valued system."""

    components: tuple[GPPosterior, ...]

    def add_observation(self, pair: Pair) -> "MultiGPPosterior":
        return MultiGPPosterior(tuple(g.add_observation(pair) for g in self.components))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.stack([g.sample_function(rng) for g in self.components])


Posterior = DiscretePosterior | GaussianPosterior | GPPosterior | ParticlePosterior | MultiGPPosterior


def discrete_update(prior: DiscretePosterior, env: FiniteEnvironment, data: DataSequence) -> DiscretePosterior:
    """Exact Bayes over a finite parameter space, in log space for stability."""
    with np.errstate(divide="ignore"):
        logw = np.log(prior.weights)
        for a, y in data:
            logw = logw + np.log(env.likelihood[:, a.index, y.index])
    if np.all(np.isneginf(logw)):
        raise DegeneratePosteriorError("observed data impossible under every parameter value")
    logw -= logw.max()
    w = np.exp(logw)
    return DiscretePosterior(w / w.sum())


def blr_update(
    prior_mean: np.ndarray,
    prior_cov: np.ndarray,
    noise_var: float,
    features: np.ndarray,
    targets: np.ndarray,
) -> GaussianPosterior:
    """Conjugate Gaussian update for a linear-Gaussian observation model."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    prior_mean = np.atleast_1d(np.asarray(prior_mean, dtype=float))
    prior_cov = np.atleast_2d(np.asarray(prior_cov, dtype=float))
    features = np.asarray(features, dtype=float).reshape(-1, len(prior_mean))
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if len(features) != len(targets):
        raise ValueError("features and targets disagree in length")
    if len(features) == 0:
        return GaussianPosterior(prior_mean, prior_cov)
    try:
        prior_prec = np.linalg.inv(prior_cov)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular prior covariance") from exc
    post_prec = prior_prec + features.T @ features / noise_var
    post_cov = np.linalg.inv(post_prec)
    post_cov = 0.5 * (post_cov + post_cov.T)
    post_mean = post_cov @ (prior_prec @ prior_mean + features.T @ targets / noise_var)
    return GaussianPosterior(post_mean, post_cov)


def systematic_resample(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Systematic resampling: one uniform offset, evenly spaced positions."""
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    return np.searchsorted(np.cumsum(weights), positions).clip(0, n - 1)


def _full_log_posterior(env: ContinuousEnvironment, particles: np.ndarray, data: DataSequence) -> np.ndarray:
    total = env.log_prior_batch(particles)
    for a, y in data:
        total = total + env.log_likelihood_batch(particles, a.index, np.asarray(y.values, dtype=float))
    return total


def smc_update(
    post: ParticlePosterior,
    env: ContinuousEnvironment,
    new_pair: Pair,
    rng: np.random.Generator,
) -> ParticlePosterior:
    """Reweight by the new observation; resample and rejuvenate on ESS collapse.

    The rejuvenation move is a Gaussian random walk with per-coordinate scale
    half the weighted particle standard deviation. When the environment
    exposes its prior log density the move is Metropolis-adjusted against the
    full posterior (resample-move), which keeps the cloud on target; without
    it the move is applied unadjusted.
    """
    action, outcome = new_pair
    y = np.asarray(outcome.values, dtype=float)
    loglik = env.log_likelihood_batch(post.particles, action.index, y)
    with np.errstate(divide="ignore"):
        logw = np.log(post.weights) + loglik
    if np.all(~np.isfinite(logw)):
        raise DegeneratePosteriorError("all particle weights underflowed")
    logw -= np.max(logw[np.isfinite(logw)])
    w = np.exp(np.where(np.isfinite(logw), logw, -np.inf))
    w /= w.sum()
    data = post.data.append(new_pair)

    n = len(w)
    ess = 1.0 / float(np.sum(w**2))
    if ess >= post.ess_threshold * n:
        return ParticlePosterior(post.particles, w, post.ess_threshold, data, post.rejuvenation_moves)

    # weighted std before resampling sets the rejuvenation scale per coordinate
    mu = w @ post.particles
    var = w @ (post.particles - mu) ** 2
    scale = 0.5 * np.sqrt(np.maximum(var, 1e-300))
    idx = systematic_resample(w, rng)
    particles = post.particles[idx].copy()
    if env.log_prior_batch is not None:
        cur_lp = _full_log_posterior(env, particles, data)
        for _ in range(post.rejuvenation_moves):
            proposal = particles + rng.standard_normal(particles.shape) * scale
            prop_lp = _full_log_posterior(env, proposal, data)
            accept = np.log(rng.random(n)) < (prop_lp - cur_lp)
            particles[accept] = proposal[accept]
            cur_lp[accept] = prop_lp[accept]
    else:
        particles = particles + rng.standard_normal(particles.shape) * scale
    weights = np.full(n, 1.0 / n)
    return ParticlePosterior(particles, weights, post.ess_threshold, data, post.rejuvenation_moves)


def sample_parameter(posterior: Posterior, rng: np.random.Generator):
    """Draw one parameter value from any posterior representation."""
    if isinstance(posterior, DiscretePosterior):
        return posterior.sample(rng)
    if isinstance(posterior, GaussianPosterior):
        return posterior.sample(rng)
    if isinstance(posterior, GPPosterior):
        return posterior.sample_function(rng)
    if isinstance(posterior, ParticlePosterior):
        return posterior.sample(rng)
    if isinstance(posterior, MultiGPPosterior):
        return posterior.sample(rng)
    raise TypeError(f"unknown posterior type {type(posterior)!r}")


def initial_posterior(env: Environment, rng: np.random.Generator) -> Posterior:
    """Construct the prior-state posterior object the harness will maintain."""
    spec = env.inference
    if spec.kind == "discrete":
        return DiscretePosterior(env.prior.copy())
    if spec.kind == "blr":
        return GaussianPosterior(spec.params["prior_mean"], spec.params["prior_cov"])
    if spec.kind == "gp":
        return GPPosterior(spec.params["kernel"], spec.params["noise_var"], spec.params["grid"], DataSequence.empty())
    if spec.kind == "gp_multi":
        comps = tuple(
            GPPosterior(k, nv, spec.params["grid"], DataSequence.empty(), component=i)
            for i, (k, nv) in enumerate(zip(spec.params["kernels"], spec.params["noise_vars"]))
        )
        return MultiGPPosterior(comps)
    if spec.kind == "particle":
        n = spec.params["num_particles"]
        particles = np.stack([env.prior_sampler(rng) for _ in range(n)])
        return ParticlePosterior(
            particles,
            np.full(n, 1.0 / n),
            spec.params.get("ess_threshold", 0.5),
            DataSequence.empty(),
            spec.params.get("rejuvenation_moves", 2),
        )
    raise ValueError(f"unknown inference kind {spec.kind!r}")


def update_posterior(posterior: Posterior, env: Environment, pair: Pair, rng: np.random.Generator) -> Posterior:
    """One-observation posterior refresh, dispatched on the representation."""
    if isinstance(posterior, DiscretePosterior):
        return discrete_update(posterior, env, DataSequence((pair,)))
    if isinstance(posterior, GaussianPosterior):
        feats = env.inference.params["feature_map"](pair[0].index)
        return blr_update(
            posterior.mean, posterior.covariance, env.inference.params["noise_var"],
            feats[None, :], np.array([pair[1].scalar]),
        )
    if isinstance(posterior, (GPPosterior, MultiGPPosterior)):
        return posterior.add_observation(pair)
    if isinstance(posterior, ParticlePosterior):
        return smc_update(posterior, env, pair, rng)
    raise TypeError(f"unknown posterior type {type(posterior)!r}")
