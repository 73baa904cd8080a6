"""Density-based clustering validation and proportional subsampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist
from scipy.special import logsumexp

NOISE = -1
DIST_FLOOR = 1e-12


@dataclass
class LabeledPointSet:
    points: np.ndarray
    labels: np.ndarray
    index: np.ndarray | None = None  # row positions in the parent set after sampling

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        self.labels = np.asarray(self.labels, dtype=int)
        if self.points.shape[0] != self.labels.shape[0]:
            raise ValueError("points and labels differ in length")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def cluster_sizes(self) -> dict[int, int]:
        labs, counts = np.unique(self.labels, return_counts=True)
        return {int(l): int(c) for l, c in zip(labs, counts)}


@dataclass
class DbcvScore:
    overall: float
    per_cluster: dict[int, float] = field(default_factory=dict)
    noise_fraction: float = 0.0

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "per_cluster": {str(k): v for k, v in sorted(self.per_cluster.items())},
            "noise_fraction": self.noise_fraction,
        }


def core_distances(dist: np.ndarray, d: int) -> np.ndarray:
    """All-points core distance of each member of one cluster.

    ``dist`` is the within-cluster distance matrix, already floored.  The
    inverse-distance power mean is evaluated in log space so large ``d`` does
    not overflow.
    """
    n = dist.shape[0]
    logd = np.log(dist)
    np.fill_diagonal(logd, np.inf)  # exp(-d * inf) = 0 drops the self term
    lse = logsumexp(-d * logd, axis=1)
    return np.exp(-(lse - np.log(n - 1)) / d)


def _max_mst_edge(weights: np.ndarray) -> float:
    if weights.shape[0] < 2:
        return 0.0
    tree = minimum_spanning_tree(weights)
    return float(tree.data.max()) if tree.nnz else 0.0


def dbcv_score(data: LabeledPointSet, metric: str = "euclidean", chunk: int = 2048) -> DbcvScore:
    """DBCV index of a labelled point set (label -1 is noise).

    Noise rows add to the total mass but form no cluster.  A lone cluster has
    no separation to measure and scores 0.
    """
    labels = data.labels
    clusters = sorted(int(l) for l in np.unique(labels) if l != NOISE)
    if not clusters:
        raise ValueError("all points are noise")
    members = {c: np.flatnonzero(labels == c) for c in clusters}
    for c, idx in members.items():
        if idx.size < 2:
            raise ValueError(f"cluster {c} has fewer than 2 points")
    d = data.d
    core = np.empty(data.n)
    sparseness = {}
    for c, idx in members.items():
        pts = data.points[idx]
        dist = np.maximum(cdist(pts, pts, metric=metric), DIST_FLOOR)
        core[idx] = core_distances(dist, d)
        mr = np.maximum(dist, np.maximum(core[idx][:, None], core[idx][None, :]))
        np.fill_diagonal(mr, 0.0)
        sparseness[c] = _max_mst_edge(mr)

    per = {}
    total = 0.0
    for c, idx in members.items():
        other = np.flatnonzero((labels != c) & (labels != NOISE))
        if other.size == 0:
            v = 0.0
        else:
            sep = np.inf
            for s in range(0, idx.size, chunk):
                block = idx[s : s + chunk]
                dist = np.maximum(cdist(data.points[block], data.points[other], metric=metric), DIST_FLOOR)
                mr = np.maximum(dist, np.maximum(core[block][:, None], core[other][None, :]))
                sep = min(sep, float(mr.min()))
            sp = sparseness[c]
            v = (sep - sp) / max(sep, sp)
        per[c] = float(v)
        total += idx.size / data.n * v
    noise = float(np.mean(labels == NOISE))
    return DbcvScore(float(total), per, noise)


def largest_remainder(sizes: dict[int, int], target: int) -> dict[int, int]:
    """Integer quotas proportional to ``sizes`` summing to ``target``.

    Leftover units go to the largest fractional parts; ties prefer the larger
    group, then the smaller label.
    """
    n = sum(sizes.values())
    exact = {k: target * v / n for k, v in sizes.items()}
    quota = {k: int(np.floor(x)) for k, x in exact.items()}
    left = target - sum(quota.values())
    order = sorted(sizes, key=lambda k: (-(exact[k] - quota[k]), -sizes[k], k))
    for k in order[:left]:
        quota[k] += 1
    return quota


def proportional_sample(data: LabeledPointSet, target_n: int, seed: int = 0) -> LabeledPointSet:
    """Subsample keeping each label's share, noise included."""
    if target_n > data.n:
        raise ValueError("target_n exceeds the number of points")
    sizes = data.cluster_sizes()
    n_clusters = sum(1 for k in sizes if k != NOISE)
    if target_n < 2 * n_clusters:
        raise ValueError(f"target_n={target_n} is below 2 points per cluster ({n_clusters} clusters)")
    quota = largest_remainder(sizes, target_n)
    rng = np.random.default_rng(seed)
    picked = []
    for lab in sorted(quota):
        idx = np.flatnonzero(data.labels == lab)
        if quota[lab]:
            picked.append(rng.choice(idx, size=quota[lab], replace=False))
    sel = np.sort(np.concatenate(picked)) if picked else np.array([], dtype=int)
    return LabeledPointSet(data.points[sel], data.labels[sel], sel)


def read_points(path) -> np.ndarray:
    """Points from CSV (one row per point) or packed binary (int64 n, d, then float64 row-major)."""
    path = str(path)
    if path.endswith(".csv"):
        return np.loadtxt(path, delimiter=",", ndmin=2)
    with open(path, "rb") as fh:
        n, d = np.frombuffer(fh.read(16), dtype="<i8")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * d:
        raise ValueError(f"{path}: expected {n * d} values, found {data.size}")
    return data.reshape(int(n), int(d)).copy()


def write_points_binary(points: np.ndarray, fh) -> None:
    points = np.ascontiguousarray(points, dtype="<f8")
    fh.write(np.array(points.shape, dtype="<i8").tobytes())
    fh.write(points.tobytes())


def read_labels(path) -> np.ndarray:
    return np.loadtxt(str(path), dtype=int, ndmin=1, delimiter=",")
