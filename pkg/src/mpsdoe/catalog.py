"""Environment catalog: desk-scale instances with sensible defaults.

Each builder accepts keyword overrides for its parameters, so a bare id
reproduces the default instance and ``catalog_environment(id, overrides)``
tweaks it.
"""
from __future__ import annotations

import hashlib
import math

import numpy as np

from .core import (
    Action,
    CatalogError,
    ContinuousEnvironment,
    DataSequence,
    FiniteEnvironment,
    InferenceSpec,
    make_grid_actions,
)
from .estimators import GPMeanEstimator, LogisticCurveMLE, RBFKernel, RidgeEstimator
from .penalties import (
    BanditRegretPenalty,
    BOSimpleRegretPenalty,
    CombinedPenalty,
    EstimationErrorPenalty,
    TableLookupPenalty,
    TransformedL2Penalty,
    constant_rule,
    coverage_rule,
    forbidden_action_rule,
    history_length_rule,
    last_pair_rule,
)


def _finish(env):
    env.penalty.bind_actions(env.actions)
    return env


def _table_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x7AB1E])))


def trapezoid_weights(grid_size: int, length: float = 1.0) -> np.ndarray:
    """Composite trapezoid quadrature weights over an interval of given length."""
    w = np.full(grid_size, length / (grid_size - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


# ---------------------------------------------------------------------------


def build_prop1() -> FiniteEnvironment:
    """Two parameters, two actions; each parameter permanently forbids one action.

    Outcomes reveal the true parameter, so the only irreversible mistake is
    the first uninformed decision.
    """
    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    lik = np.zeros((2, 2, 2))
    for k in range(2):
        lik[k, :, k] = 1.0
    penalty = TableLookupPenalty(None, forbidden_action_rule([1, 0]))
    return _finish(
        FiniteEnvironment(
            name="prop1",
            theta_labels=["theta0", "theta1"],
            prior=np.array([0.5, 0.5]),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
        )
    )


def build_bandit(num_theta: int = 8, num_actions: int = 4, table_seed: int = 0) -> FiniteEnvironment:
    """Finite-parameter Bernoulli bandit with the instantaneous-regret penalty."""
    rng = _table_rng(table_seed)
    f = rng.uniform(0.05, 0.95, size=(num_theta, num_actions))
    lik = np.stack([1.0 - f, f], axis=2)  # outcomes {0, 1}
    actions = tuple(Action(i, (float(i),)) for i in range(num_actions))
    penalty = BanditRegretPenalty(lambda k, table=f: table[int(k)])
    return _finish(
        FiniteEnvironment(
            name=f"bandit{num_theta}",
            theta_labels=[f"f{k}" for k in range(num_theta)],
            prior=np.full(num_theta, 1.0 / num_theta),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
            outcome_values=np.array([0.0, 1.0]),
        )
    )


def build_exp1(
    a: float = 2.1,
    b: float = 7.0,
    c: float = 6.0,
    eta2: float = 0.01,
    grid_size: int = 100,
    normalizer: float = 60.0,
    num_particles: int = 4000,
    ess_threshold: float = 0.5,
    mle_steps: int = 25,
    mle_lr: float = 0.05,
    mle_ridge: float = 1e-4,
    ig_shape: float = 20.0,
    ig_scale: float = 1.0,
    ig_convention: str = "shape_scale",
) -> ContinuousEnvironment:
    """Logistic decay curve on [0, 10]: estimate the curve parameters (a, b, c).

    The parameter vector is (a, b, c, log eta^2); the noise variance is
    carried in log space so particle rejuvenation stays positive.
    """
    actions = make_grid_actions([(0.0, 10.0)], grid_size)
    grid_x = np.array([act.coords[0] for act in actions])
    prior_mean = np.array([2.0, 5.0, 5.0])
    prior_sd = np.array([1.0, math.sqrt(3.0), math.sqrt(3.0)])

    if ig_convention not in ("shape_scale", "shape_rate"):
        raise ValueError("ig_convention must be 'shape_scale' or 'shape_rate'")
    gamma_scale = 1.0 / ig_scale if ig_convention == "shape_scale" else ig_scale

    def prior_sampler(rng: np.random.Generator) -> np.ndarray:
        abc = prior_mean + prior_sd * rng.standard_normal(3)
        ev = 1.0 / rng.gamma(ig_shape, gamma_scale)
        return np.append(abc, math.log(ev))

    def curve(theta3: np.ndarray, xs: np.ndarray) -> np.ndarray:
        z = np.clip(theta3[..., 1:2] * (xs - theta3[..., 2:3]), -40.0, 40.0)
        return theta3[..., 0:1] / (1.0 + np.exp(z))

    def mean_fn(theta, idxs):
        return curve(np.asarray(theta)[None, :3], grid_x[np.asarray(idxs, dtype=int)])[0]

    def mean_batch(thetas, a_idx):
        return curve(np.asarray(thetas)[:, :3], grid_x[a_idx : a_idx + 1])[:, 0]

    def noise_scale(theta):
        return math.sqrt(math.exp(min(max(float(theta[3]), -30.0), 10.0)))

    def noise_scale_batch(thetas):
        return np.sqrt(np.exp(np.clip(np.asarray(thetas)[:, 3], -30.0, 10.0)))

    def log_prior_batch(thetas):
        th = np.asarray(thetas)
        le = th[:, 3]
        ev = np.exp(np.clip(le, -30.0, 10.0))
        lp = -0.5 * np.sum(((th[:, :3] - prior_mean) / prior_sd) ** 2, axis=1)
        # inverse-gamma density on the variance, with the log-space jacobian
        if ig_convention == "shape_scale":
            lp = lp - ig_shape * le - ig_scale / ev
        else:
            lp = lp - ig_shape * le - 1.0 / (ig_scale * ev)
        return lp

    estimator = LogisticCurveMLE(prior_mean, lr=mle_lr, steps_per_obs=mle_steps, ridge=mle_ridge)
    penalty = EstimationErrorPenalty(
        tau_of_theta=lambda th: np.asarray(th)[:3],
        estimator=estimator,
        normalizer=normalizer,
        xs_for_batch=grid_x,
    )
    return _finish(
        ContinuousEnvironment(
            name="exp1",
            actions=actions,
            prior_sampler=prior_sampler,
            mean_fn=mean_fn,
            noise_scale=noise_scale,
            penalty=penalty,
            inference=InferenceSpec("particle", {"num_particles": num_particles, "ess_threshold": ess_threshold}),
            outcome_dim=1,
            mean_batch=mean_batch,
            noise_scale_batch=noise_scale_batch,
            log_prior_batch=log_prior_batch,
            fixed_theta_star=np.array([a, b, c, math.log(eta2)]),
        )
    )


def exp2_target(v: np.ndarray) -> np.ndarray:
    return np.sin(3.9 * math.pi * ((v[..., 0] - 0.1) ** 2 + v[..., 1] + 0.1))


def build_exp2(
    grid_side: int = 50,
    noise_var: float = 0.01,
    ridge_reg: float = 0.01,
    normalizer: float = 64.0,
) -> ContinuousEnvironment:
    """Linear regression on 16 radial basis functions over [0, 1]^2."""
    actions = make_grid_actions([(0.0, 1.0), (0.0, 1.0)], grid_side)
    coords = np.array([act.coords for act in actions])
    centers = np.array([(u, v) for u in np.linspace(0, 1, 4) for v in np.linspace(0, 1, 4)])
    amp = 1.0 / math.sqrt(0.2 * math.pi)

    d2 = np.sum((coords[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    features = amp * np.exp(-5.0 * d2)  # (grid, 16)
    theta_star = exp2_target(centers)

    def mean_fn(theta, idxs):
        return features[np.asarray(idxs, dtype=int)] @ np.asarray(theta)

    def mean_batch(thetas, a_idx):
        return np.asarray(thetas) @ features[a_idx]

    estimator = RidgeEstimator(features, ridge_reg)
    penalty = EstimationErrorPenalty(
        tau_of_theta=lambda th: np.asarray(th),
        estimator=estimator,
        normalizer=normalizer,
    )
    return _finish(
        ContinuousEnvironment(
            name="exp2",
            actions=actions,
            prior_sampler=lambda rng: rng.standard_normal(16),
            mean_fn=mean_fn,
            noise_scale=lambda th: math.sqrt(noise_var),
            penalty=penalty,
            inference=InferenceSpec(
                "blr",
                {
                    "prior_mean": np.zeros(16),
                    "prior_cov": np.eye(16),
                    "noise_var": noise_var,
                    "feature_map": lambda i: features[i],
                },
            ),
            outcome_dim=1,
            mean_batch=mean_batch,
            fixed_theta_star=theta_star,
        )
    )


def build_gp_logdensity(
    grid_size: int = 100,
    lengthscale: float = 0.15,
    signal_var: float = 1.0,
    noise_var: float = 0.01,
    normalizer: float = 40.0,
) -> ContinuousEnvironment:
    """Estimate exp(f) for an unknown smooth log-density f drawn from a GP prior."""
    actions = make_grid_actions([(0.0, 1.0)], grid_size)
    coords = np.array([act.coords for act in actions])
    kernel = RBFKernel([lengthscale], signal_var)
    prior_grid = kernel(coords, coords)
    prior_chol = np.linalg.cholesky(prior_grid + 1e-8 * np.eye(grid_size))

    def prior_sampler(rng: np.random.Generator) -> np.ndarray:
        return prior_chol @ rng.standard_normal(grid_size)

    estimator = GPMeanEstimator(kernel, noise_var, coords)
    penalty = TransformedL2Penalty(
        field_of_theta=lambda th: np.asarray(th),
        estimator=estimator,
        transform=np.exp,
        quad_weights=trapezoid_weights(grid_size),
        normalizer=normalizer,
    )
    return _finish(
        ContinuousEnvironment(
            name="gp_logdensity",
            actions=actions,
            prior_sampler=prior_sampler,
            mean_fn=lambda theta, idxs: np.asarray(theta)[np.asarray(idxs, dtype=int)],
            noise_scale=lambda th: math.sqrt(noise_var),
            penalty=penalty,
            inference=InferenceSpec("gp", {"kernel": kernel, "noise_var": noise_var, "grid": coords}),
            outcome_dim=1,
            mean_batch=lambda thetas, a_idx: np.asarray(thetas)[:, a_idx],
        )
    )


def build_combined(
    grid_size: int = 100,
    noise_sd: float = 0.05,
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
    component_normalizers: tuple[float, float] = (8.0, 8.0),
) -> ContinuousEnvironment:
    """Three co-observed functions: estimate the first two, optimise the third.

    Each experiment returns a noisy 3-vector; the penalty mixes two squared-L2
    estimation terms and one best-seen optimisation gap.
    """
    actions = make_grid_actions([(0.0, 1.0)], grid_size)
    coords = np.array([act.coords for act in actions])
    kernels = (RBFKernel([0.3], 1.0), RBFKernel([0.25], 1.0), RBFKernel([0.2], 1.0))
    noise_vars = (noise_sd**2,) * 3
    chols = [np.linalg.cholesky(k(coords, coords) + 1e-8 * np.eye(grid_size)) for k in kernels]

    def prior_sampler(rng: np.random.Generator) -> np.ndarray:
        return np.stack([ch @ rng.standard_normal(grid_size) for ch in chols])

    qw = trapezoid_weights(grid_size)
    comps = [
        (weights[0], TransformedL2Penalty(
            lambda th: np.asarray(th)[0], GPMeanEstimator(kernels[0], noise_vars[0], coords, component=0),
            lambda x: x, qw, component_normalizers[0], y_component=0)),
        (weights[1], TransformedL2Penalty(
            lambda th: np.asarray(th)[1], GPMeanEstimator(kernels[1], noise_vars[1], coords, component=1),
            lambda x: x, qw, component_normalizers[1], y_component=1)),
        (weights[2], BOSimpleRegretPenalty(lambda th: np.asarray(th)[2])),
    ]
    penalty = CombinedPenalty(comps)
    return _finish(
        ContinuousEnvironment(
            name="combined",
            actions=actions,
            prior_sampler=prior_sampler,
            mean_fn=lambda theta, idxs: np.asarray(theta)[:, np.asarray(idxs, dtype=int)].T,
            noise_scale=lambda th: np.full(3, noise_sd),
            penalty=penalty,
            inference=InferenceSpec("gp_multi", {"kernels": kernels, "noise_vars": noise_vars, "grid": coords}),
            outcome_dim=3,
        )
    )


def build_coverage() -> FiniteEnvironment:
    """Weighted set coverage: monotone and adaptive-submodular by construction."""
    sets = [frozenset({0, 1}), frozenset({2, 3}), frozenset({4}), frozenset({1, 2})]
    weights = {0: 0.25, 1: 0.25, 2: 0.2, 3: 0.15, 4: 0.15}
    actions = tuple(Action(i, (float(i),)) for i in range(len(sets)))
    lik = np.ones((1, len(sets), 1))
    penalty = TableLookupPenalty(None, coverage_rule(sets, weights))
    return _finish(
        FiniteEnvironment(
            name="coverage",
            theta_labels=["theta0"],
            prior=np.array([1.0]),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
        )
    )


def build_lastpair(table_seed: int = 0) -> FiniteEnvironment:
    """Penalty that depends only on the most recent action-outcome pair."""
    rng = _table_rng(table_seed + 1)
    values = rng.uniform(0.0, 1.0, size=(2, 2, 2))
    lik = rng.dirichlet(np.ones(2), size=(2, 2))
    lik /= lik.sum(axis=2, keepdims=True)
    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    penalty = TableLookupPenalty(None, last_pair_rule(values))
    return _finish(
        FiniteEnvironment(
            name="lastpair",
            theta_labels=["theta0", "theta1"],
            prior=np.array([0.5, 0.5]),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
        )
    )


def build_bo_det(f_values: tuple[float, ...] = (0.2, 0.9, 0.5, 0.7)) -> FiniteEnvironment:
    """Deterministic-outcome instance with the best-seen optimisation penalty."""
    f = np.asarray(f_values, dtype=float)
    actions = tuple(Action(i, (float(i),)) for i in range(len(f)))
    lik = np.ones((1, len(f), 1))
    penalty = BOSimpleRegretPenalty(lambda k: f)
    return _finish(
        FiniteEnvironment(
            name="bo_det",
            theta_labels=["theta0"],
            prior=np.array([1.0]),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
        )
    )


def build_shortsight(rate: float = 0.25) -> FiniteEnvironment:
    """Adversarial penalty that grows with history length (more data is worse)."""
    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    lik = np.full((1, 2, 2), 0.5)
    penalty = TableLookupPenalty(None, history_length_rule(rate))
    return _finish(
        FiniteEnvironment(
            name="shortsight",
            theta_labels=["theta0"],
            prior=np.array([1.0]),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
        )
    )


def build_deception2() -> FiniteEnvironment:
    """Two-step trap: the myopically best first action forecloses the zero-penalty branch."""
    actions = (Action(0, (0.0,)), Action(1, (1.0,)))
    lik = np.ones((1, 2, 1))
    y = ("d", 0)
    entries = {
        (0, ((0, y),)): 0.4,
        (0, ((1, y),)): 0.6,
        (0, ((0, y), (0, y))): 0.4,
        (0, ((0, y), (1, y))): 0.3,
        (0, ((1, y), (0, y))): 0.0,
        (0, ((1, y), (1, y))): 0.6,
    }
    penalty = TableLookupPenalty(entries, constant_rule(1.0))
    return _finish(
        FiniteEnvironment(
            name="deception2",
            theta_labels=["theta0"],
            prior=np.array([1.0]),
            actions=actions,
            likelihood=lik,
            penalty=penalty,
            horizon_hint=2,
        )
    )


def hashed_rule(salt: int):
    """Deterministic pseudo-random table values keyed by (theta, sequence)."""

    def rule(theta: int, data: DataSequence) -> float:
        digest = hashlib.sha256(repr((salt, theta, data.key())).encode()).digest()
        return int.from_bytes(digest[:8], "big") / 2**64

    return rule


def random_finite_env(
    seed: int,
    num_theta: int = 2,
    num_actions: int = 2,
    num_outcomes: int = 2,
    penalty_kind: str = "table",
) -> FiniteEnvironment:
    """Random finite instance for verification suites (deterministic in seed)."""
    rng = _table_rng(seed + 1000)
    prior = rng.dirichlet(np.ones(num_theta))
    prior /= prior.sum()
    lik = rng.dirichlet(np.ones(num_outcomes), size=(num_theta, num_actions))
    lik /= lik.sum(axis=2, keepdims=True)
    actions = tuple(Action(i, (float(i),)) for i in range(num_actions))
    if penalty_kind == "table":
        penalty = TableLookupPenalty(None, hashed_rule(seed))
    elif penalty_kind == "bandit":
        f = rng.uniform(0.0, 1.0, size=(num_theta, num_actions))
        penalty = BanditRegretPenalty(lambda k, table=f: table[int(k)])
    elif penalty_kind == "bo":
        f = rng.uniform(0.0, 1.0, size=(num_theta, num_actions))
        penalty = BOSimpleRegretPenalty(lambda k, table=f: table[int(k)])
    else:
        raise ValueError(f"unknown penalty kind {penalty_kind!r}")
    return _finish(
        FiniteEnvironment(
            name=f"random{seed}",
            theta_labels=[f"t{k}" for k in range(num_theta)],
            prior=prior,
            actions=actions,
            likelihood=lik,
            penalty=penalty,
        )
    )


CATALOG = {
    "prop1": (build_prop1, "two forbidden-action parameters; outcome reveals the truth"),
    "bandit8": (build_bandit, "8-parameter 4-arm Bernoulli bandit, instantaneous regret"),
    "exp1": (build_exp1, "logistic curve on [0,10]; estimate (a, b, c) with particle inference"),
    "exp2": (build_exp2, "16 RBF linear model on [0,1]^2; conjugate Gaussian inference"),
    "gp_logdensity": (build_gp_logdensity, "GP-drawn log density; exp-transformed L2 penalty"),
    "combined": (build_combined, "estimate two functions while optimising a third"),
    "coverage": (build_coverage, "weighted set coverage (monotone, adaptive-submodular)"),
    "lastpair": (build_lastpair, "penalty depending only on the last pair"),
    "bo_det": (build_bo_det, "deterministic best-seen optimisation instance"),
    "shortsight": (build_shortsight, "length-penalised adversarial instance"),
    "deception2": (build_deception2, "two-step instance where the myopic first move is suboptimal"),
}


def catalog_environment(env_id: str, overrides: dict | None = None):
    """Construct a catalog environment, applying parameter overrides."""
    try:
        builder, _ = CATALOG[env_id]
    except KeyError:
        raise CatalogError(f"unknown environment id {env_id!r}; known: {sorted(CATALOG)}") from None
    return builder(**(overrides or {}))


def catalog_ids() -> list[tuple[str, str]]:
    return [(name, desc) for name, (_, desc) in CATALOG.items()]
