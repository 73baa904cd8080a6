"""Layered ego networks: contact frequencies, active ties, rings and circles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from .core import ALL_KINDS, FREQUENCY_KINDS, Period, PeriodSchedule
from .meanshift import mean_shift

DEFAULT_ACTIVE_THRESHOLD = 1.0


@dataclass(frozen=True)
class TieFrequency:
    alter_id: str
    events_by_kind: dict
    frequency: float  # events per year


@dataclass
class EgoNetworkSnapshot:
    ego_id: str
    period: int
    ties: list[TieFrequency]  # active ties only
    rings: list[frozenset]  # inner (most frequent) first
    ring_means: list[float] = field(default_factory=list)
    bandwidth: Optional[float] = None

    @property
    def circles(self) -> list[frozenset]:
        out, acc = [], frozenset()
        for ring in self.rings:
            acc = acc | ring
            out.append(acc)
        return out

    @property
    def active_size(self) -> int:
        return sum(len(r) for r in self.rings)

    @property
    def n_rings(self) -> int:
        return len(self.rings)

    @property
    def empty(self) -> bool:
        return not self.rings

    @property
    def alters(self) -> frozenset:
        return frozenset().union(*self.rings) if self.rings else frozenset()

    def ring_of(self, alter: str) -> Optional[int]:
        for k, ring in enumerate(self.rings):
            if alter in ring:
                return k
        return None

    def to_dict(self) -> dict:
        return {
            "ego": self.ego_id,
            "period": self.period,
            "active_size": self.active_size,
            "n_rings": self.n_rings,
            "rings": [sorted(r) for r in self.rings],
            "ring_mean_frequency": [round(v, 12) for v in self.ring_means],
            "circle_sizes": [len(c) for c in self.circles],
        }


@dataclass(frozen=True)
class RingTransitionSummary:
    moved_inward: int
    moved_outward: int
    stayed: int
    entered: int
    exited: int


def _numerator_kinds(include_quotes: bool) -> tuple[str, ...]:
    return ALL_KINDS if include_quotes else FREQUENCY_KINDS


def contact_frequencies(
    ego: str,
    period: Period,
    frame: pd.DataFrame,
    include_quotes: bool = False,
) -> list[TieFrequency]:
    """Per-alter interaction frequency (events per year) of ``ego`` within ``period``.

    Quotes are tallied in ``events_by_kind`` but left out of the frequency
    unless ``include_quotes`` is set.
    """
    ts = frame["timestamp"]
    mask = (frame["ego_id"] == ego) & (ts >= pd.Timestamp(period.start)) & (ts < pd.Timestamp(period.end))
    sub = frame.loc[mask, ["alter_id", "kind"]]
    if sub.empty:
        return []
    counts = sub.groupby(["alter_id", "kind"]).size().unstack(fill_value=0)
    kinds = _numerator_kinds(include_quotes)
    out = []
    for alter, row in counts.iterrows():
        by_kind = {k: int(row.get(k, 0)) for k in ALL_KINDS}
        n = sum(by_kind[k] for k in kinds)
        out.append(TieFrequency(str(alter), by_kind, n / period.length_years))
    out.sort(key=lambda t: t.alter_id)
    return out


def frequency_table(
    frame: pd.DataFrame,
    schedule: PeriodSchedule,
    include_quotes: bool = False,
) -> pd.DataFrame:
    """All (ego, period, alter) frequencies at once; ``frame`` must carry a ``period`` column."""
    counts = (
        frame.groupby(["ego_id", "period", "alter_id", "kind"], observed=True)
        .size()
        .unstack("kind", fill_value=0)
    )
    for k in ALL_KINDS:
        if k not in counts.columns:
            counts[k] = 0
    counts = counts[list(ALL_KINDS)].rename(columns={k: f"n_{k}" for k in ALL_KINDS})
    counts = counts.reset_index()
    lengths = np.array([p.length_years for p in schedule])
    num = sum(counts[f"n_{k}"] for k in _numerator_kinds(include_quotes))
    counts["frequency"] = num.to_numpy() / lengths[counts["period"].to_numpy()]
    counts["ego_id"] = counts["ego_id"].astype(str)
    counts["alter_id"] = counts["alter_id"].astype(str)
    return counts.sort_values(["ego_id", "period", "alter_id"]).reset_index(drop=True)


def active_ties(ties: Iterable[TieFrequency], threshold: float = DEFAULT_ACTIVE_THRESHOLD) -> list[TieFrequency]:
    return [t for t in ties if t.frequency >= threshold]


def active_size_table(freq: pd.DataFrame, threshold: float = DEFAULT_ACTIVE_THRESHOLD) -> pd.DataFrame:
    """Ego x period matrix of active network sizes (0 where an ego has no active tie)."""
    active = freq[freq["frequency"] >= threshold]
    return active.groupby(["ego_id", "period"]).size().unstack("period", fill_value=0)


def mean_shift_rings(
    frequencies: Sequence[float],
    bandwidth: Optional[float] = None,
    log_scale: bool = True,
    quantile: float = 0.3,
):
    """Cluster contact frequencies into rings; label 0 is the innermost ring.

    With ``log_scale`` the clustering runs on log-frequencies (an explicit
    ``bandwidth`` is then in log units).
    """
    x = np.asarray(frequencies, dtype=float)
    if x.size == 0:
        raise ValueError("empty active network: nothing to cluster")
    if log_scale:
        if np.any(x <= 0):
            raise ValueError("log-scale clustering needs positive frequencies")
        x = np.log(x)
    return mean_shift(x, bandwidth=bandwidth, quantile=quantile)


def snapshot_from_ties(
    ego: str,
    period: int,
    ties: Sequence[TieFrequency],
    threshold: float = DEFAULT_ACTIVE_THRESHOLD,
    log_scale: bool = True,
    bandwidth: Optional[float] = None,
    quantile: float = 0.3,
) -> EgoNetworkSnapshot:
    act = sorted(active_ties(ties, threshold), key=lambda t: t.alter_id)
    if not act:
        return EgoNetworkSnapshot(ego, period, [], [])
    freqs = np.array([t.frequency for t in act])
    res = mean_shift_rings(freqs, bandwidth=bandwidth, log_scale=log_scale, quantile=quantile)
    rings, means = [], []
    for k in range(res.n_clusters):
        members = res.labels == k
        rings.append(frozenset(t.alter_id for t, m in zip(act, members) if m))
        means.append(float(freqs[members].mean()))
    return EgoNetworkSnapshot(ego, period, act, rings, means, res.bandwidth)


def build_snapshot(
    ego: str,
    period: Period,
    frame: pd.DataFrame,
    threshold: float = DEFAULT_ACTIVE_THRESHOLD,
    include_quotes: bool = False,
    log_scale: bool = True,
    bandwidth: Optional[float] = None,
) -> EgoNetworkSnapshot:
    """Ego network of ``ego`` in ``period``; empty (``active_size == 0``) without active ties."""
    ties = contact_frequencies(ego, period, frame, include_quotes)
    return snapshot_from_ties(ego, period.index, ties, threshold, log_scale, bandwidth)


def ties_from_table(rows: pd.DataFrame) -> list[TieFrequency]:
    out = []
    cols = [f"n_{k}" for k in ALL_KINDS]
    for alter, freq, *counts in zip(rows["alter_id"], rows["frequency"], *(rows[c] for c in cols)):
        out.append(TieFrequency(alter, dict(zip(ALL_KINDS, map(int, counts))), float(freq)))
    return out


def build_snapshots(
    freq: pd.DataFrame,
    egos: Optional[Iterable[str]] = None,
    threshold: float = DEFAULT_ACTIVE_THRESHOLD,
    log_scale: bool = True,
    bandwidth: Optional[float] = None,
    periods: Optional[Iterable[int]] = None,
    quantile: float = 0.3,
) -> dict[tuple[str, int], EgoNetworkSnapshot]:
    """Snapshots for every (ego, period) present in a :func:`frequency_table`."""
    if egos is not None:
        freq = freq[freq["ego_id"].isin(set(egos))]
    freq = freq[freq["frequency"] >= threshold]
    out = {}
    for (ego, k), rows in freq.groupby(["ego_id", "period"], sort=True):
        out[(ego, int(k))] = snapshot_from_ties(
            ego, int(k), ties_from_table(rows), threshold, log_scale, bandwidth, quantile
        )
    if egos is not None and periods is not None:
        for ego in egos:
            for k in periods:
                out.setdefault((ego, k), EgoNetworkSnapshot(ego, k, [], []))
    return out


def ring_transition_summary(a: EgoNetworkSnapshot, b: EgoNetworkSnapshot) -> RingTransitionSummary:
    """Movement of alters between two snapshots of the same ego.

    Ring positions are compared as normalised ranks (k / number of rings, with
    k = 1 innermost) so networks with different ring counts are comparable.
    """
    if a.ego_id != b.ego_id:
        raise ValueError("snapshots belong to different egos")
    ra = {alt: (k + 1) / a.n_rings for k, ring in enumerate(a.rings) for alt in ring}
    rb = {alt: (k + 1) / b.n_rings for k, ring in enumerate(b.rings) for alt in ring}
    inward = outward = stayed = 0
    for alt in ra.keys() & rb.keys():
        if rb[alt] < ra[alt]:
            inward += 1
        elif rb[alt] > ra[alt]:
            outward += 1
        else:
            stayed += 1
    return RingTransitionSummary(
        moved_inward=inward,
        moved_outward=outward,
        stayed=stayed,
        entered=len(rb.keys() - ra.keys()),
        exited=len(ra.keys() - rb.keys()),
    )


def snapshot_rows(snapshots: Iterable[EgoNetworkSnapshot]) -> pd.DataFrame:
    """Tidy table (ego, period, active_size, n_rings, circle_sizes)."""
    rows = [
        {
            "ego": s.ego_id,
            "period": s.period,
            "active_size": s.active_size,
            "n_rings": s.n_rings,
            "circle_sizes": "|".join(str(len(c)) for c in s.circles),
        }
        for s in snapshots
    ]
    table = pd.DataFrame(rows, columns=["ego", "period", "active_size", "n_rings", "circle_sizes"])
    return table.sort_values(["ego", "period"]).reset_index(drop=True)
