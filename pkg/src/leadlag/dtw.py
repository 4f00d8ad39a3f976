"""Dynamic time warping distance for scalar sequences.

The distance is the classic boundary-matched DTW with {down, right, diagonal}
steps and absolute difference as the local cost.  The returned value is the
raw sum of matched cell costs along the optimal path; no path-length
normalization is applied.

The inner dynamic program is the package's hot loop (kernel construction
evaluates it O(windows * assets * n^2) times), so it is compiled with numba
by default.  Setting the environment variable ``LEADLAG_NUMBA=0`` before
import selects the interpreted fallback, which runs the same source.
``benchmarks/bench_dtw.py`` compares the two paths.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import EmptySequence, TooLarge

_ENV_FLAG = "LEADLAG_NUMBA"

# Tractability bound for the exhaustive oracle (7x7 grid at most).
ORACLE_MAX_CELLS = 49


def _dtw_loop(x, y, band):
    """Accumulated-cost DP.  ``band`` < 0 means no band constraint."""
    n = x.shape[0]
    m = y.shape[0]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(n):
        for j in range(m):
            if band >= 0 and abs(i - j) > band:
                continue
            c = abs(x[i] - y[j])
            best = acc[i, j]
            if acc[i, j + 1] < best:
                best = acc[i, j + 1]
            if acc[i + 1, j] < best:
                best = acc[i + 1, j]
            acc[i + 1, j + 1] = c + best
    return acc[n, m]


try:  # pragma: no cover - exercised via the public wrapper
    import numba

    _dtw_loop_jit = numba.njit(cache=True)(_dtw_loop)
    _NUMBA_IMPORTED = True
except ImportError:  # pragma: no cover
    _dtw_loop_jit = None
    _NUMBA_IMPORTED = False


def _env_wants_numba() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in ("0", "false", "off")


USING_NUMBA = _NUMBA_IMPORTED and _env_wants_numba()

_dtw_impl = _dtw_loop_jit if USING_NUMBA else _dtw_loop


def _as_series(seq, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(seq, dtype=np.float64)
    if arr.ndim != 1:
        raise EmptySequence(f"{name} must be a 1-D sequence, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptySequence(f"{name} is empty")
    return arr


def cost_matrix(x, y) -> np.ndarray:
    """Pairwise local costs |x_i - y_j| as an |x| x |y| matrix."""
    xa = _as_series(x, "x")
    ya = _as_series(y, "y")
    return np.abs(xa[:, None] - ya[None, :])


def dtw_distance(x, y, band: int | None = None) -> float:
    """DTW distance between two scalar sequences.

    ``band`` optionally restricts the warping path to |i - j| <= band
    (Sakoe-Chiba); the default is unconstrained.  A band too narrow to
    admit any boundary-matched path yields ``inf``.
    """
    xa = _as_series(x, "x")
    ya = _as_series(y, "y")
    b = -1 if band is None else int(band)
    return float(_dtw_impl(xa, ya, b))


def dtw_brute_oracle(x, y) -> float:
    """Minimum path cost by explicit enumeration of all monotone paths.

    Deliberately unmemoized and independent of the DP above; only usable
    for tiny inputs (|x| * |y| <= 49).
    """
    xa = _as_series(x, "x")
    ya = _as_series(y, "y")
    if xa.shape[0] * ya.shape[0] > ORACLE_MAX_CELLS:
        raise TooLarge(
            f"oracle limited to {ORACLE_MAX_CELLS} cells, got {xa.shape[0]}x{ya.shape[0]}"
        )

    def rec(i: int, j: int) -> float:
        c = abs(xa[i] - ya[j])
        if i == 0 and j == 0:
            return c
        best = math.inf
        if i > 0:
            best = min(best, rec(i - 1, j))
        if j > 0:
            best = min(best, rec(i, j - 1))
        if i > 0 and j > 0:
            best = min(best, rec(i - 1, j - 1))
        return c + best

    return rec(xa.shape[0] - 1, ya.shape[0] - 1)


@dataclass(frozen=True)
class DtwResult:
    """Distance plus the warping path that achieves it."""

    distance: float
    path: list[tuple[int, int]]


def dtw_align(x, y) -> DtwResult:
    """DTW distance together with one optimal path.

    Ties in the DP minimum are broken toward the diagonal predecessor,
    which affects only the reported path, never the distance.
    """
    xa = _as_series(x, "x")
    ya = _as_series(y, "y")
    n, m = xa.shape[0], ya.shape[0]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(n):
        for j in range(m):
            acc[i + 1, j + 1] = abs(xa[i] - ya[j]) + min(
                acc[i, j], acc[i, j + 1], acc[i + 1, j]
            )
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i > 0 and j > 0 and acc[i, j] <= min(acc[i, j + 1], acc[i + 1, j]):
            i, j = i - 1, j - 1
        elif i > 0 and (j == 0 or acc[i, j + 1] <= acc[i + 1, j]):
            i = i - 1
        else:
            j = j - 1
        path.append((i, j))
    path.reverse()
    return DtwResult(distance=float(acc[n, m]), path=path)
