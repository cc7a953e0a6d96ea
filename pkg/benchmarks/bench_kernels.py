"""Time the compiled kernels against the NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [--sizes 100,500,2000] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from jpen._backend import available_backends


def _inputs(p, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2 * p, p))
    s = a.T @ a / (2 * p)
    d = 1.0 / np.sqrt(np.diag(s))
    k = s * np.outer(d, d)
    np.fill_diagonal(k, 1.0)
    return k, s, d


def cases(k, s, d):
    return {
        "threshold_shrink": lambda m: m.threshold_shrink(k, 0.05, 0.3, 1.0),
        "sign_matrix": lambda m: m.sign_matrix(k),
        "scale_symmetric": lambda m: m.scale_symmetric(k, d),
        "l1_distance": lambda m: m.l1_distance(k, s),
        "count_offdiag_zeros": lambda m: m.count_offdiag_zeros(k, 0.05),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,500,2000")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the NumPy fallback is available")
    names = list(backends)
    print(f"{'kernel':<22}{'p':>6}" + "".join(f"{n + ' ms':>14}" for n in names) + f"{'speedup':>10}")
    for p in (int(v) for v in args.sizes.split(",")):
        k, s, d = _inputs(p)
        for name, fn in cases(k, s, d).items():
            ms = {}
            for b in names:
                mod = backends[b]
                ms[b] = 1e3 * min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
            ratio = ms["python"] / ms["cython"] if "cython" in ms else float("nan")
            print(f"{name:<22}{p:>6}" + "".join(f"{ms[b]:>14.3f}" for b in names) + f"{ratio:>10.2f}")


if __name__ == "__main__":
    main()
