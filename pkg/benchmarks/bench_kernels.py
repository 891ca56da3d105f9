"""Time the numpy kernels against the compiled ones.

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--size 20000]
"""
import argparse
import timeit

import numpy as np

from nilsphere import _pykernels

try:
    from nilsphere import _ckernels
except ImportError:
    _ckernels = None

from nilsphere.haar import sample_haar


def cases(size, rng):
    x = rng.uniform(0, 20, size)
    z = rng.uniform(0, 8, size)
    ks = sample_haar("O", 4, rng, size=size)
    px = rng.normal(size=4)
    pa = rng.normal(size=(4, 4))
    pa = pa - pa.T
    lam = np.array([2.0, 1.0])
    mu = np.array([2.0, 1.0])
    l = np.array([3, 1])
    m = np.array([1, 1])
    w = rng.normal(size=size)
    return {
        "laguerre_norm(n=40)": lambda k: k.laguerre_norm(40, 0.5, x),
        "laguerre_norm_table(n=40)": lambda k: k.laguerre_norm_table(40, 0.0, x),
        "bessel_series(alpha=0.5)": lambda k: k.bessel_series(0.5, z),
        "hermite_poly_table(k=30)": lambda k: k.hermite_poly_table(30, z - 4.0),
        "theta_samples(p=4)": lambda k: k.theta_samples(ks, px, pa, lam, 0.0, mu, l, m),
        "laguerre_moments(l<=200)": lambda k: k.laguerre_moments(0.0, x, w, 0.0, 200),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':28s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(args.size, rng).items():
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:28s} {tp:11.2f} {'n/a':>12s} {'':>8s}")
            continue
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:28s} {tp:11.2f} {tc:12.2f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
