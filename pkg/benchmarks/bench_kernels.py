"""Benchmark the hot estimator kernel: numba against the pure-numpy fallback.

The batched logistic-curve gradient ascent dominates the runtime of
look-ahead decisions on the curve-estimation environment (grid size x
Monte-Carlo samples fits per decision). Run:

    python benchmarks/bench_kernels.py
    MPSDOE_NO_NUMBA=1 python benchmarks/bench_kernels.py   # fallback only
"""
from __future__ import annotations

import time

import numpy as np

from mpsdoe import _accel


def make_problem(rng, batch, points):
    x = rng.uniform(0, 10, (batch, points))
    y = 2.1 / (1 + np.exp(7.0 * (x - 6.0))) + 0.1 * rng.standard_normal((batch, points))
    p0 = np.tile(np.array([2.0, 5.0, 5.0]), (batch, 1))
    return p0, x, y


def bench(fn, args, repeats=3):
    fn(*args)  # warm-up / compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    pm = np.array([2.0, 5.0, 5.0])
    steps, lr, reg = 25, 0.05, 1e-4
    print(f"active backend: {_accel.ACTIVE_BACKEND}")
    print(f"{'batch':>6} {'points':>7} {'active (ms)':>12} {'numpy (ms)':>11} {'speedup':>8}")
    for batch, points in ((500, 10), (5000, 20), (5000, 50), (5000, 100)):
        p0, x, y = make_problem(rng, batch, points)
        args = (p0.copy(), x, y, steps, lr, reg, pm)
        t_active = bench(_accel.adam_logistic, args)
        t_numpy = bench(_accel.adam_logistic_numpy, args)
        out_a = _accel.adam_logistic(*args)
        out_n = _accel.adam_logistic_numpy(*args)
        assert np.allclose(out_a, out_n, atol=1e-9), "backends disagree"
        print(f"{batch:>6} {points:>7} {t_active * 1e3:>12.1f} {t_numpy * 1e3:>11.1f} {t_numpy / t_active:>8.2f}x")


if __name__ == "__main__":
    main()
