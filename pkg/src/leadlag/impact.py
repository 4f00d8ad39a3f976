"""Relational impact factors: distance weights, lead-lag kernels, aggregation.

Two feature constructions per window, both driven by DTW distances between
the target asset's in-window history and each related asset's columns:

* synchronous: one full-window distance per asset, used to scale that
  asset's price column elementwise (features stay 24 x m).
* asynchronous: the window is cut into n equal subwindows and an n x n
  lower-triangular kernel of subwindow distances is built per asset; the
  kernels are flattened (structural zeros kept, so feature positions are
  stable), stacked into an m x n^2 matrix, and the price block is
  matrix-multiplied by it, giving 24 x n^2 features.

The kernel entry (i, j) pairs target subwindow i with related-asset
subwindow j and is populated only for i >= j: related assets lead or
coincide with the target.  ``lag_direction="target_leads"`` swaps the two
roles for ablation while keeping the lower-triangular layout.
"""

from dataclasses import dataclass

import numpy as np

from .dtw import dtw_distance
from .errors import BadPartition, ConfigError
from .ingest import Window

SUBWINDOW_COUNTS = (1, 2, 3, 4, 6, 8, 12, 24)


@dataclass(frozen=True)
class LeadLagKernel:
    """Lower-triangular matrix of subwindow distances for one asset."""

    asset_index: int
    n: int
    entries: np.ndarray  # (n, n), exactly 0 above the diagonal


def subwindow_bounds(length: int, n: int) -> list[tuple[int, int]]:
    """n contiguous equal ranges covering [0, length)."""
    if n < 1 or length % n != 0:
        raise BadPartition(f"{n} does not divide window length {length}")
    sub = length // n
    return [(k * sub, (k + 1) * sub) for k in range(n)]


def sync_weight(window: Window, asset_index: int) -> float:
    """Full-window DTW distance between the target and one related asset."""
    return dtw_distance(window.target_context, window.input[:, asset_index])


def sync_impact(window: Window) -> np.ndarray:
    """Scale each related-asset column by its full-window distance weight."""
    m = window.input.shape[1]
    weights = np.array([sync_weight(window, a) for a in range(m)])
    return window.input * weights[None, :]


def build_kernel(window: Window, asset_index: int, n: int,
                 lag_direction: str = "related_leads") -> LeadLagKernel:
    """Subwindow-distance kernel for one (window, asset) pair."""
    length = window.input.shape[0]
    bounds = subwindow_bounds(length, n)
    target = window.target_context
    asset = window.input[:, asset_index]
    if lag_direction == "target_leads":
        target, asset = asset, target
    entries = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        ti, tj = bounds[i]
        for j in range(i + 1):
            ai, aj = bounds[j]
            entries[i, j] = dtw_distance(target[ti:tj], asset[ai:aj])
    return LeadLagKernel(asset_index=asset_index, n=n, entries=entries)


def flatten_kernel(kernel: LeadLagKernel) -> np.ndarray:
    """Row-major flattening, structural zeros included (length n^2)."""
    return kernel.entries.reshape(-1).copy()


def async_impact(window: Window, n: int,
                 lag_direction: str = "related_leads") -> np.ndarray:
    """Aggregate all related assets through their flattened kernels.

    Stacks the m flattened kernels into an (m, n^2) matrix and multiplies
    the (24, m) price block by it, yielding (24, n^2) features.
    """
    m = window.input.shape[1]
    stacked = np.empty((m, n * n), dtype=np.float64)
    for a in range(m):
        stacked[a] = flatten_kernel(build_kernel(window, a, n, lag_direction))
    return window.input @ stacked


def featurize(windows, method: str, n: int = 4,
              lag_direction: str = "related_leads") -> np.ndarray:
    """Features for every window: (W, 24, F) with F per the method.

    method "raw" passes the related-asset price block through unchanged,
    "syn" applies sync_impact, "asyn" applies async_impact with the given n.
    """
    if method == "raw":
        return np.stack([w.input for w in windows])
    if method == "syn":
        return np.stack([sync_impact(w) for w in windows])
    if method == "asyn":
        return np.stack([async_impact(w, n, lag_direction) for w in windows])
    raise ConfigError(f"unknown method {method!r}")


def feature_width(method: str, m: int, n: int) -> int:
    if method == "asyn":
        return n * n
    return m
