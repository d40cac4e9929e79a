"""Compare the compiled and pure row reduction kernels on random F_p matrices.

Usage: python benchmarks/bench_linalg.py [--sizes 20 60 120] [--primes 2 3 7] [--repeat 5]
"""

import argparse
import time

import numpy as np

from siltkit import _fp_py

try:
    from siltkit import _fp_fast
except ImportError:  # pragma: no cover - depends on the build
    _fp_fast = None


def _time(fn, mats, p):
    best = float("inf")
    for m in mats:
        a = m.copy()
        t = time.perf_counter()
        piv = fn(a, p)
        best = min(best, time.perf_counter() - t)
    return best, piv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 60, 120])
    ap.add_argument("--primes", type=int, nargs="+", default=[2, 3, 7])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'p':>3} {'n':>5} {'python (ms)':>12} {'cython (ms)':>12} {'speedup':>8}")
    for p in args.primes:
        for n in args.sizes:
            mats = [np.ascontiguousarray(rng.integers(0, p, (n, n + n // 2)), dtype=np.int64)
                    for _ in range(args.repeat)]
            tp, piv_p = _time(_fp_py.rref_inplace, mats, p)
            if _fp_fast is None:
                print(f"{p:>3} {n:>5} {tp * 1e3:>12.3f} {'n/a':>12} {'n/a':>8}")
                continue
            tc, piv_c = _time(_fp_fast.rref_inplace, mats, p)
            assert list(piv_p) == list(piv_c), "kernels disagree"
            print(f"{p:>3} {n:>5} {tp * 1e3:>12.3f} {tc * 1e3:>12.3f} {tp / tc:>8.1f}")


if __name__ == "__main__":
    main()
