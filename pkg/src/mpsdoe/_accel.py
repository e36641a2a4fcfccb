"""Numerically hot kernels: numba-compiled with a pure-numpy fallback.

The only genuinely hot loop in the package is the batched warm-started
gradient ascent used by the logistic-curve maximum-likelihood estimator
(thousands of small fits per look-ahead decision). Both implementations
compute identical arithmetic; set ``MPSDOE_NO_NUMBA=1`` before import to
force the numpy path. ``benchmarks/bench_kernels.py`` compares the two.
"""
from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("MPSDOE_NO_NUMBA", "").strip()
NUMBA_REQUESTED = _FLAG not in ("1", "true", "yes")

_CLIP = 40.0
_B1, _B2, _EPS = 0.9, 0.999, 1e-8


def logistic_curve(params: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Plateau / (1 + exp(slope * (x - centre))) for one parameter triple."""
    a, b, c = params[0], params[1], params[2]
    z = np.clip(b * (np.asarray(xs, dtype=float) - c), -_CLIP, _CLIP)
    return a / (1.0 + np.exp(z))


def adam_logistic_numpy(params0, X, Y, steps, lr, reg, prior_mean):
    """Batched ridge-penalised gradient ascent on the Gaussian log likelihood.

    params0: (B, 3) start points, X/Y: (B, T) per-fit data. Returns (B, 3).
    """
    a = params0[:, 0].astype(float).copy()
    b = params0[:, 1].astype(float).copy()
    c = params0[:, 2].astype(float).copy()
    m = np.zeros((3, a.size))
    v = np.zeros((3, a.size))
    pm0, pm1, pm2 = float(prior_mean[0]), float(prior_mean[1]), float(prior_mean[2])
    for s in range(steps):
        z = np.clip(b[:, None] * (X - c[:, None]), -_CLIP, _CLIP)
        e = np.exp(z)
        inv = 1.0 / (1.0 + e)
        f = a[:, None] * inv
        r = Y - f
        w = a[:, None] * e * inv * inv
        ga = (r * inv).mean(axis=1) - reg * (a - pm0)
        gb = (-(r * w) * (X - c[:, None])).mean(axis=1) - reg * (b - pm1)
        gc = (r * w).mean(axis=1) * b - reg * (c - pm2)
        bc1 = 1.0 - _B1 ** (s + 1)
        bc2 = 1.0 - _B2 ** (s + 1)
        for i, g in enumerate((ga, gb, gc)):
            m[i] = _B1 * m[i] + (1.0 - _B1) * g
            v[i] = _B2 * v[i] + (1.0 - _B2) * g * g
        a += lr * (m[0] / bc1) / (np.sqrt(v[0] / bc2) + _EPS)
        b += lr * (m[1] / bc1) / (np.sqrt(v[1] / bc2) + _EPS)
        c += lr * (m[2] / bc1) / (np.sqrt(v[2] / bc2) + _EPS)
    return np.stack([a, b, c], axis=1)


def _build_numba_kernel():
    from numba import njit

    @njit(cache=True, fastmath=False)
    def adam_logistic_nb(params0, X, Y, steps, lr, reg, prior_mean):  # pragma: no cover (compiled)
        B, T = X.shape
        out = np.empty((B, 3))
        for bi in range(B):
            a = params0[bi, 0]
            b = params0[bi, 1]
            c = params0[bi, 2]
            m0 = m1 = m2 = 0.0
            v0 = v1 = v2 = 0.0
            for s in range(steps):
                ga = 0.0
                gb = 0.0
                gc = 0.0
                for j in range(T):
                    dx = X[bi, j] - c
                    z = b * dx
                    if z > _CLIP:
                        z = _CLIP
                    elif z < -_CLIP:
                        z = -_CLIP
                    e = np.exp(z)
                    inv = 1.0 / (1.0 + e)
                    f = a * inv
                    r = Y[bi, j] - f
                    w = a * e * inv * inv
                    ga += r * inv
                    gb += -r * w * dx
                    gc += r * w
                n = float(T)
                ga = ga / n - reg * (a - prior_mean[0])
                gb = gb / n - reg * (b - prior_mean[1])
                gc = (gc / n) * b - reg * (c - prior_mean[2])
                bc1 = 1.0 - _B1 ** (s + 1)
                bc2 = 1.0 - _B2 ** (s + 1)
                m0 = _B1 * m0 + (1.0 - _B1) * ga
                m1 = _B1 * m1 + (1.0 - _B1) * gb
                m2 = _B1 * m2 + (1.0 - _B1) * gc
                v0 = _B2 * v0 + (1.0 - _B2) * ga * ga
                v1 = _B2 * v1 + (1.0 - _B2) * gb * gb
                v2 = _B2 * v2 + (1.0 - _B2) * gc * gc
                a += lr * (m0 / bc1) / (np.sqrt(v0 / bc2) + _EPS)
                b += lr * (m1 / bc1) / (np.sqrt(v1 / bc2) + _EPS)
                c += lr * (m2 / bc1) / (np.sqrt(v2 / bc2) + _EPS)
            out[bi, 0] = a
            out[bi, 1] = b
            out[bi, 2] = c
        return out

    return adam_logistic_nb


if NUMBA_REQUESTED:
    try:
        adam_logistic = _build_numba_kernel()
        ACTIVE_BACKEND = "numba"
    except ImportError:  # pragma: no cover
        adam_logistic = adam_logistic_numpy
        ACTIVE_BACKEND = "numpy"
else:
    adam_logistic = adam_logistic_numpy
    ACTIVE_BACKEND = "numpy"
