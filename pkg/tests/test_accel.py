import subprocess
import sys

import numpy as np

from mpsdoe import _accel


def _random_problem(rng, b=64, t=12):
    x = rng.uniform(0, 10, (b, t))
    y = 2.0 / (1 + np.exp(5.0 * (x - 5.0))) + 0.1 * rng.standard_normal((b, t))
    p0 = np.tile(np.array([2.0, 5.0, 5.0]), (b, 1)) + 0.1 * rng.standard_normal((b, 3))
    return p0, x, y


def test_backends_agree():
    rng = np.random.default_rng(0)
    p0, x, y = _random_problem(rng)
    pm = np.array([2.0, 5.0, 5.0])
    nb = _accel._build_numba_kernel()(p0.copy(), x, y, 20, 0.05, 1e-4, pm)
    npy = _accel.adam_logistic_numpy(p0.copy(), x, y, 20, 0.05, 1e-4, pm)
    assert np.allclose(nb, npy, atol=1e-10)


def test_env_flag_selects_numpy_backend():
    code = "import mpsdoe._accel as a; print(a.ACTIVE_BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True, env={"MPSDOE_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"},
    )
    assert out.stdout.strip() == "numpy"


def test_default_backend_is_numba():
    assert _accel.ACTIVE_BACKEND == "numba"
