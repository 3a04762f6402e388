"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Times the exact sign-vector maximisation for growing row counts and one
projected-subgradient descent on a discrete plus-minus problem.
"""

import argparse
import time

import numpy as np

from pmlab import _fallback, kernels, solver
from pmlab.banach import Couple, NormSpec
from pmlab.discrete import ThetaR, discrete_coefs

try:
    from pmlab import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def bench_vertex_max(repeat):
    rng = np.random.default_rng(0)
    print(f"{'rows':>5} {'p':>4} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for m in (8, 12, 16, 18):
        for p in (1.0, 2.0, np.inf):
            rows = rng.normal(size=(m, 3))
            t_py = best_time(lambda: kernels.vertex_max(rows, p, impl=_fallback), repeat)
            if _kernels is None:
                print(f"{m:>5} {p:>4} {1e3 * t_py:>11.2f} {'n/a':>12}")
                continue
            t_cy = best_time(lambda: kernels.vertex_max(rows, p, impl=_kernels), repeat)
            print(f"{m:>5} {p:>4} {1e3 * t_py:>11.2f} {1e3 * t_cy:>12.3f} {t_py / t_cy:>8.1f}")


def bench_descend(repeat):
    if kernels.descend is None:
        print("descent: compiled loop not available")
        return
    c = Couple(NormSpec(2, 2.0, (1.0, 2.0)), NormSpec(2, 2.0, (3.0, 0.5)))
    a = np.array([1.0, -0.7])
    w = np.stack([c.n0.w, c.n1.w])
    print(f"\n{'window':>6} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for window in (2, 4, 8):
        m = 2 * window + 1
        coefs = np.ascontiguousarray(discrete_coefs(ThetaR(0.5, 0.5), window))
        lengths = np.ones(m)
        X0 = solver.default_starts(lengths, np.arange(-window, window + 1.0), window, a, 2, 0)[1]
        t_py = best_time(lambda: solver._descend(c, coefs, lengths, window, a, X0, 200, 0.5),
                         repeat)
        t_cy = best_time(lambda: kernels.descend(coefs, lengths, window, a,
                                                 np.ascontiguousarray(X0), 200, 0.5, w,
                                                 c.n0.p, c.n1.p), repeat)
        print(f"{window:>6} {1e3 * t_py:>11.1f} {1e3 * t_cy:>12.2f} {t_py / t_cy:>8.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"active backend: {kernels.BACKEND}\n")
    bench_vertex_max(args.repeat)
    bench_descend(args.repeat)


if __name__ == "__main__":
    main()
