"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from bahadur_lrd import kernels


def cases(rng):
    x = rng.normal(size=16384)
    t = np.linspace(-5, 5, 4096)
    rho = (1.0 + np.arange(2**16)) ** -0.3
    a = rng.normal(size=21)
    return {
        "select_and_count n=16384": lambda k: k.select_and_count(x, 8192, 0.0),
        "hermite_table J=20 m=4096": lambda k: k.hermite_table(20, t),
        "lag_series_sum n=65536 J=20": lambda k: k.lag_series_sum(rho, a, rho.size),
        "lagged_products n=16384 lags=32": lambda k: k.lagged_products(x, 32),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = {"python": kernels.pure}
    if kernels.compiled is not None:
        impls["cython"] = kernels.compiled
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s}" + "".join(f"{name:>12s}" for name in impls) + "     speedup")
    for label, fn in cases(rng).items():
        best = {}
        for name, impl in impls.items():
            number = 20
            best[name] = min(timeit.repeat(lambda: fn(impl), number=number, repeat=args.repeat)) / number
        row = f"{label:34s}" + "".join(f"{best[n] * 1e3:10.3f}ms" for n in impls)
        if "cython" in best:
            row += f"  {best['python'] / best['cython']:9.2f}x"
        print(row)


if __name__ == "__main__":
    main()
