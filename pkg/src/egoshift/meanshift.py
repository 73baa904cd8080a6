"""One-dimensional flat-kernel Mean Shift.

Every point seeds a trajectory that repeatedly moves to the mean of the data
inside ``[m - h, m + h]``.  Converged positions closer than ``h / 2`` are
merged into one mode and each point joins its nearest mode; a point exactly
half-way between two modes joins the higher one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MeanShiftResult:
    labels: np.ndarray  # 0 = cluster with the highest mean
    modes: np.ndarray  # descending, in the clustering space
    bandwidth: float
    n_iter: int
    converged: bool

    @property
    def n_clusters(self) -> int:
        return len(self.modes)


def estimate_bandwidth(values, quantile: float = 0.3) -> float:
    """Mean distance from each point to its k-th nearest other point, k = ceil(quantile * n)."""
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n < 2:
        return 0.0
    if not 0 < quantile <= 1:
        raise ValueError("quantile must be in (0, 1]")
    k = min(n - 1, max(1, math.ceil(quantile * n)))
    d = np.abs(x[:, None] - x[None, :])
    # column 0 of each sorted row is the point itself
    kth = np.partition(d, k, axis=1)[:, k]
    return float(kth.mean())


def shift(values, point: float, bandwidth: float) -> float:
    """Mean of the data inside the flat window around ``point``."""
    x = np.asarray(values, dtype=float)
    inside = x[np.abs(x - point) <= bandwidth]
    return float(inside.mean()) if inside.size else float(point)


def mean_shift(
    values,
    bandwidth: float | None = None,
    quantile: float = 0.3,
    tol: float = 1e-6,
    max_iter: int = 300,
) -> MeanShiftResult:
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty active network: nothing to cluster")
    if not np.all(np.isfinite(x)):
        raise ValueError("values must be finite")
    span = float(x.max() - x.min())
    if span == 0.0:
        return MeanShiftResult(np.zeros(x.size, dtype=int), x[:1].copy(), 0.0, 0, True)
    h = estimate_bandwidth(x, quantile) if bandwidth is None else float(bandwidth)
    if h < 0:
        raise ValueError("bandwidth must be non-negative")

    xs = np.sort(x)
    csum = np.concatenate([[0.0], np.cumsum(xs)])
    m = x.copy()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        lo = np.searchsorted(xs, m - h, side="left")
        hi = np.searchsorted(xs, m + h, side="right")
        new = (csum[hi] - csum[lo]) / (hi - lo)
        step = np.max(np.abs(new - m))
        m = new
        if step < tol * span:
            converged = True
            break

    # merge converged positions, scanning from the top
    order = np.unique(m)[::-1]
    groups: list[list[float]] = []
    for v in order:
        if groups and groups[-1][-1] - v < h / 2:
            groups[-1].append(v)
        else:
            groups.append([v])
    modes = np.array([np.mean(g) for g in groups])

    # nearest mode; argmin keeps the first (higher) mode on ties
    labels = np.argmin(np.abs(x[:, None] - modes[None, :]), axis=1)
    used = np.unique(labels)
    if used.size < modes.size:
        modes = modes[used]
        labels = np.searchsorted(used, labels)
    return MeanShiftResult(labels.astype(int), modes, h, it, converged)
