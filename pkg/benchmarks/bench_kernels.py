"""Compare the compiled kernel backend against the NumPy reference.

Times the moments kernel (the maximum-likelihood inner loop) at several
outcome-table sizes, and one representative regret fit end to end.

Usage:
    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gmmcombine import _kernels
from gmmcombine._kernels import reference

try:
    from gmmcombine._kernels import _speedups
except ImportError:
    _speedups = None


def time_call(fn, *args, repeat=200):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def bench_moments():
    print(f"selected backend: {_kernels.BACKEND}")
    print()
    print(f"{'agents':>6} {'outcomes':>9} {'numpy':>12} {'cython':>12} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for n in (10, 14, 16, 18, 20):
        P = 2**n
        repeat = max(3, min(200, 2_000_000 // P))
        stats = np.ascontiguousarray(rng.uniform(0, 50, size=(n, P)))
        coeffs = np.ascontiguousarray(-rng.uniform(0.001, 0.05, size=n))
        t_ref = time_call(reference.log_linear_moments, stats, coeffs, repeat=repeat)
        if _speedups is not None:
            t_cy = time_call(_speedups.log_linear_moments, stats, coeffs, repeat=repeat)
            logz_r, _ = reference.log_linear_moments(stats, coeffs)
            logz_c, _ = _speedups.log_linear_moments(stats, coeffs)
            assert abs(logz_r - logz_c) < 1e-9 * max(1.0, abs(logz_r))
            print(f"{n:>6} {P:>9} {t_ref * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us {t_ref / t_cy:>7.2f}x")
        else:
            print(f"{n:>6} {P:>9} {t_ref * 1e6:>10.1f}us {'n/a':>12} {'n/a':>8}")


def bench_fit():
    from gmmcombine.combine import FitConfig, fit_regret_gmm_ml
    from gmmcombine.experiment import ExperimentConfig, _TrialContext, _load_fixture_for

    cfg = ExperimentConfig()
    ctx = _TrialContext(cfg, 0, *_load_fixture_for(cfg))
    t0 = time.perf_counter()
    fit_regret_gmm_ml(ctx.regret_model, ctx.train, FitConfig())
    print()
    print(f"one 10-agent regret fit (500 plays, backend={_kernels.BACKEND}): "
          f"{time.perf_counter() - t0:.3f}s")


if __name__ == "__main__":
    bench_moments()
    bench_fit()
