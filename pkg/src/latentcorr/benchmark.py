"""Benchmark the compiled vs pure-numpy inversion-counting kernel.

The pair-counting step of Kendall's tau is the only O(n log n) hot loop
in the package; it ships with a numba-compiled merge sort and a pure
numpy fallback (selected via the LATENTCORR_DISABLE_NUMBA environment
variable).  Run as:

    python -m latentcorr.benchmark [--sizes 1000,10000,100000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ._kernels import HAS_NUMBA, count_inversions_numba, count_inversions_numpy


def _time(fn, arr, repeats):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(arr)
        best = min(best, time.perf_counter() - t0)
    return best, result


def run(sizes, repeats):
    rng = np.random.default_rng(0)
    if HAS_NUMBA:
        count_inversions_numba(rng.standard_normal(100))  # trigger compilation
    print(f"numba available: {HAS_NUMBA}")
    print(f"{'n':>10} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>8}")
    for n in sizes:
        arr = rng.standard_normal(n)
        t_np, r_np = _time(count_inversions_numpy, arr, repeats)
        if HAS_NUMBA:
            t_nb, r_nb = _time(count_inversions_numba, arr, repeats)
            if r_np != r_nb:
                raise AssertionError(f"backend mismatch at n={n}: {r_np} vs {r_nb}")
            print(f"{n:>10} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.2f}")
        else:
            print(f"{n:>10} {t_np * 1e3:>12.3f} {'-':>12} {'-':>8}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1000,10000,100000,1000000")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)
    run([int(s) for s in args.sizes.split(",")], args.repeats)


if __name__ == "__main__":
    main()
