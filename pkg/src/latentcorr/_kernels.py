"""Inversion-counting kernels behind the Kendall statistics.

Two interchangeable implementations of strict inversion counting on a
float array: a numba-compiled bottom-up merge sort and a pure-numpy
divide-and-conquer fallback.  Both return the exact integer count, so the
choice of backend never changes results.

Backend selection: numba is used when importable unless the environment
variable ``LATENTCORR_DISABLE_NUMBA`` is set to a truthy value
(``1``/``true``/``yes``).  ``count_inversions`` is the selected kernel;
both implementations stay importable for the benchmark.
"""

from __future__ import annotations

import os

import numpy as np


def _numba_disabled() -> bool:
    return os.environ.get("LATENTCORR_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}


def count_inversions_numpy(a: np.ndarray) -> int:
    """Strict inversions (i < j, a[i] > a[j]) by merge-based recursion."""
    a = np.ascontiguousarray(a, dtype=np.float64)

    def rec(x):
        n = x.size
        if n < 2:
            return 0, x
        mid = n // 2
        inv_l, left = rec(x[:mid])
        inv_r, right = rec(x[mid:])
        # pairs (i in left, j in right) with left[i] > right[j]
        cross = int(np.sum(left.size - np.searchsorted(left, right, side="right")))
        merged = np.empty(n, dtype=np.float64)
        idx = np.searchsorted(left, right, side="right") + np.arange(right.size)
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        merged[mask] = right
        merged[~mask] = left
        return inv_l + inv_r + cross, merged

    return rec(a)[0]


try:
    if _numba_disabled():
        raise ImportError("numba disabled by LATENTCORR_DISABLE_NUMBA")
    from numba import njit

    @njit(cache=True)
    def _count_inversions_jit(a):  # pragma: no cover - exercised via wrapper
        n = a.size
        arr = a.copy()
        buf = np.empty(n, dtype=np.float64)
        inv = 0
        width = 1
        while width < n:
            lo = 0
            while lo < n:
                mid = min(lo + width, n)
                hi = min(lo + 2 * width, n)
                i, j, k = lo, mid, lo
                while i < mid and j < hi:
                    if arr[j] < arr[i]:
                        buf[k] = arr[j]
                        j += 1
                        inv += mid - i
                    else:
                        buf[k] = arr[i]
                        i += 1
                    k += 1
                while i < mid:
                    buf[k] = arr[i]
                    i += 1
                    k += 1
                while j < hi:
                    buf[k] = arr[j]
                    j += 1
                    k += 1
                lo += 2 * width
            arr, buf = buf, arr
            width *= 2
        return inv

    def count_inversions_numba(a: np.ndarray) -> int:
        return int(_count_inversions_jit(np.ascontiguousarray(a, dtype=np.float64)))

    HAS_NUMBA = True
    count_inversions = count_inversions_numba
    BACKEND = "numba"
except ImportError:
    HAS_NUMBA = False
    count_inversions_numba = None
    count_inversions = count_inversions_numpy
    BACKEND = "numpy"
