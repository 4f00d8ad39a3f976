"""Compare the compiled and interpreted DTW inner loops.

Both paths run the same source; numba only changes how it executes.
Run with ``python3 benchmarks/bench_dtw.py``.  Typical output on one
core shows the compiled loop 2-3 orders of magnitude faster at the
window sizes the kernel builder uses (3 to 24 points).
"""

import time

import numpy as np

from leadlag import dtw


def bench(fn, pairs, repeats=5):
    """Best-of-N wall time for one full pass over the pairs."""
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for x, y in pairs:
            fn(x, y, -1)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    if not dtw._NUMBA_IMPORTED:
        raise SystemExit("numba unavailable; nothing to compare")

    rng = np.random.default_rng(0)
    for length, count in ((3, 2000), (6, 2000), (12, 1000), (24, 500)):
        pairs = [
            (rng.random(length), rng.random(length)) for _ in range(count)
        ]
        # warm up compilation outside the timed region
        dtw._dtw_loop_jit(pairs[0][0], pairs[0][1], -1)

        t_jit = bench(dtw._dtw_loop_jit, pairs)
        t_py = bench(dtw._dtw_loop, pairs)
        print(
            f"len={length:3d} calls={count:5d}  "
            f"compiled={t_jit * 1e3:9.3f} ms  "
            f"interpreted={t_py * 1e3:9.3f} ms  "
            f"speedup={t_py / t_jit:8.1f}x"
        )

    # agreement spot check: identical results from both paths
    for _ in range(200):
        x = rng.random(rng.integers(2, 25))
        y = rng.random(rng.integers(2, 25))
        a = dtw._dtw_loop_jit(x, y, -1)
        b = dtw._dtw_loop(x, y, -1)
        assert a == b, (a, b)
    print("agreement: compiled == interpreted on 200 random pairs")


if __name__ == "__main__":
    main()
