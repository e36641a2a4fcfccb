import numpy as np

from mpsdoe.core import Action, DataSequence, RealOutcome
from mpsdoe.estimators import GPMeanEstimator, LogisticCurveMLE, RBFKernel, RidgeEstimator


def _make_seq(actions, idx_y_pairs):
    return DataSequence(tuple((actions[i], RealOutcome((y,))) for i, y in idx_y_pairs))


def test_logistic_mle_empty_is_prior_mean():
    est = LogisticCurveMLE([2.0, 5.0, 5.0])
    assert np.allclose(est.estimate(DataSequence.empty()), [2.0, 5.0, 5.0])


def test_logistic_mle_recovers_curve_on_informative_data():
    true = np.array([2.1, 7.0, 6.0])
    rng = np.random.default_rng(1)
    xs = np.concatenate([rng.uniform(5.2, 6.8, 50), rng.uniform(0, 10, 50)])
    ys = true[0] / (1 + np.exp(true[1] * (xs - true[2]))) + 0.1 * rng.standard_normal(100)
    actions = tuple(Action(i, (float(x),)) for i, x in enumerate(xs))
    est = LogisticCurveMLE([2.0, 5.0, 5.0])
    data = DataSequence.empty()
    for i, y in enumerate(ys):
        data = data.append((actions[i], RealOutcome((float(y),))))
    tau = est.estimate(data)
    assert np.sum((tau - true) ** 2) < 0.3


def test_logistic_mle_appended_matches_sequential():
    rng = np.random.default_rng(2)
    xs = rng.uniform(0, 10, 6)
    ys = 2.0 / (1 + np.exp(5.0 * (xs - 5.0))) + 0.1 * rng.standard_normal(6)
    actions = tuple(Action(i, (float(x),)) for i, x in enumerate(xs))
    est = LogisticCurveMLE([2.0, 5.0, 5.0])
    data = _make_seq(actions, [(i, float(ys[i])) for i in range(5)])
    batch = est.estimate_appended(data, np.array([xs[5], xs[5]]), np.array([ys[5], ys[5] + 0.2]))
    direct = est.estimate(data.append((actions[5], RealOutcome((float(ys[5]),)))))
    assert np.allclose(batch[0], direct, atol=1e-12)
    assert not np.allclose(batch[0], batch[1])


def test_ridge_matches_direct_solve():
    rng = np.random.default_rng(3)
    feats = rng.standard_normal((12, 4))
    est = RidgeEstimator(feats, reg=0.1)
    actions = tuple(Action(i, (float(i),)) for i in range(12))
    idx = [0, 3, 7, 7, 11]
    ys = rng.standard_normal(len(idx))
    data = _make_seq(actions, list(zip(idx, ys)))
    phi = feats[idx]
    direct = np.linalg.solve(phi.T @ phi + 0.1 * np.eye(4), phi.T @ ys)
    assert np.allclose(est.estimate(data), direct, atol=1e-10)


def test_ridge_appended_matches_refit():
    rng = np.random.default_rng(4)
    feats = rng.standard_normal((10, 3))
    est = RidgeEstimator(feats, reg=0.05)
    actions = tuple(Action(i, (float(i),)) for i in range(10))
    data = _make_seq(actions, [(1, 0.3), (4, -0.2)])
    new_idx = np.array([0, 5, 9])
    new_ys = np.array([0.1, -0.4, 0.8])
    batch = est.estimate_appended(data, new_idx, new_ys)
    for b, (i, y) in enumerate(zip(new_idx, new_ys)):
        refit = est.estimate(data.append((actions[i], RealOutcome((float(y),)))))
        assert np.allclose(batch[b], refit, atol=1e-10)


def test_gp_mean_appended_matches_refit():
    rng = np.random.default_rng(5)
    grid = np.linspace(0, 1, 25)[:, None]
    actions = tuple(Action(i, (float(grid[i, 0]),)) for i in range(25))
    est = GPMeanEstimator(RBFKernel([0.2], 1.0), 0.01, grid)
    data = _make_seq(actions, [(3, 0.5), (12, -0.7), (20, 0.1)])
    new_idx = np.array([0, 8, 24])
    new_ys = np.array([0.2, 0.9, -0.3])
    batch = est.estimate_appended(data, new_idx, new_ys)
    for b, (i, y) in enumerate(zip(new_idx, new_ys)):
        refit = est.estimate(data.append((actions[i], RealOutcome((float(y),)))))
        assert np.allclose(batch[b], refit, atol=1e-6)


def test_gp_mean_empty_is_prior_mean():
    grid = np.linspace(0, 1, 10)[:, None]
    est = GPMeanEstimator(RBFKernel([0.2], 1.0), 0.01, grid)
    assert np.allclose(est.estimate(DataSequence.empty()), 0.0)
