"""Backend benchmark: compiled kernels against the numpy fallback.

Times the fused dual sweep on a synthetic instance and cross-checks that
both backends agree before reporting throughput.
"""

import time

import numpy as np

from ._kernels import _fallback

try:
    from ._kernels import _core
except ImportError:
    _core = None


def _instance(rows, cols, seed):
    rng = np.random.default_rng(seed)
    ybar = rng.uniform(-1.0, 3.0, (rows, cols))
    d = rng.uniform(0.5, 2.0, (rows, cols))
    tau = 0.7
    w = rng.uniform(-1.0, 1.0, (rows, cols, 2)) * 0.01
    w_prev = rng.uniform(-1.0, 1.0, (rows, cols, 2)) * 0.01
    lam = 0.05
    sigma = 0.5 / (8.0 * tau)
    return ybar, d, tau / d, w, w_prev, 0.6, sigma, lam


def _time(module, args, iters):
    module.dual_update(*args)  # warm once
    started = time.perf_counter()
    for _ in range(iters):
        out = module.dual_update(*args)
    return (time.perf_counter() - started) / iters, out


def run_bench(rows=64, cols=64, iters=200, seed=0):
    """Print a comparison table; returns 0 (1 when backends disagree)."""
    args = _instance(rows, cols, seed)
    per_np, out_np = _time(_fallback, args, iters)
    print("instance: %dx%d, %d sweeps per backend" % (rows, cols, iters))
    print("numpy fallback : %8.1f us/sweep" % (per_np * 1e6))
    if _core is None:
        print("compiled core  : not built")
        return 0
    per_c, out_c = _time(_core, args, iters)
    print("compiled core  : %8.1f us/sweep  (%.1fx)"
          % (per_c * 1e6, per_np / per_c))
    for a, b, tol in ((out_np[0], out_c[0], 1e-12), (out_np[1], out_c[1], 1e-12)):
        if not np.allclose(a, b, rtol=tol, atol=1e-13):
            print("backend mismatch on arrays")
            return 1
    for a, b in zip(out_np[2:], out_c[2:]):
        if not np.isclose(a, b, rtol=1e-10, atol=1e-12):
            print("backend mismatch on reductions")
            return 1
    print("backends agree on the checked instance")
    return 0
