"""Longitudinal cohort selection: regular, account-active and not a size outlier."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .core import ALL_KINDS, Period, PeriodSchedule
from .egonet import DEFAULT_ACTIVE_THRESHOLD, active_size_table, frequency_table
from .ingest import with_periods

DAYS_PER_MONTH = 365.25 / 12


@dataclass
class CohortFilterReport:
    per_stage_counts: list[tuple[str, int]] = field(default_factory=list)
    outlier_fences: dict[int, tuple[float, float]] = field(default_factory=dict)
    outliers_per_period: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_stage_counts": [{"stage": s, "users": n} for s, n in self.per_stage_counts],
            "outlier_fences": {str(k): list(v) for k, v in sorted(self.outlier_fences.items())},
            "outliers_per_period": {str(k): v for k, v in sorted(self.outliers_per_period.items())},
        }


def _month_key(ts: pd.Series) -> np.ndarray:
    return (ts.dt.year * 12 + ts.dt.month - 1).to_numpy()


def _period_month_keys(period: Period) -> set[int]:
    return {y * 12 + m - 1 for y, m in period.months()}


def required_months(period: Period, share: float = 0.5) -> int:
    return math.ceil(share * len(period.months()) - 1e-12)


def is_regular(
    user: str,
    period: Period,
    frame: pd.DataFrame,
    share: float = 0.5,
    kinds: Sequence[str] = ALL_KINDS,
) -> bool:
    """True when the user interacted in at least ``ceil(share * M)`` of the period's M months."""
    ts = frame["timestamp"]
    mask = (
        (frame["ego_id"] == user)
        & frame["kind"].isin(kinds)
        & (ts >= pd.Timestamp(period.start))
        & (ts < pd.Timestamp(period.end))
    )
    months = set(_month_key(ts[mask])) & _period_month_keys(period)
    return len(months) >= required_months(period, share)


def is_account_active(
    user: str,
    period: Period,
    frame: pd.DataFrame,
    slack_months: float = 6.0,
) -> bool:
    """Gap between the last record and the period end is below the mean gap plus slack.

    The mean inter-event interval uses every record of the user before the
    period end; fewer than two records means the interval is undefined and
    the account is not considered active.
    """
    ts = frame.loc[(frame["ego_id"] == user), "timestamp"]
    end = pd.Timestamp(period.end)
    ts = ts[ts < end]
    if len(ts) < 2:
        return False
    first, last = ts.min(), ts.max()
    mean_gap = (last - first) / (len(ts) - 1)
    return (end - last) < mean_gap + pd.Timedelta(days=slack_months * DAYS_PER_MONTH)


def quantile_linear(values: Sequence[float], q: float) -> float:
    """Quantile by linear interpolation between order statistics at (n - 1) * q."""
    x = sorted(float(v) for v in values)
    if not x:
        raise ValueError("quantile of an empty sample")
    h = (len(x) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(x) - 1)
    return x[lo] + (h - lo) * (x[hi] - x[lo])


def iqr_outlier_fences(values: Sequence[float], multiplier: float = 1.5) -> tuple[float, float]:
    values = list(values)
    if not values:
        raise ValueError("IQR fences need at least one value")
    q1 = quantile_linear(values, 0.25)
    q3 = quantile_linear(values, 0.75)
    iqr = q3 - q1
    return q1 - multiplier * iqr, q3 + multiplier * iqr


def regularity_table(
    frame: pd.DataFrame,
    schedule: PeriodSchedule,
    share: float = 0.5,
    kinds: Sequence[str] = ALL_KINDS,
) -> pd.DataFrame:
    """Boolean user x period matrix of :func:`is_regular` (``frame`` carries ``period``)."""
    sub = frame[frame["kind"].isin(kinds)]
    users = sorted(frame["ego_id"].astype(str).unique())
    months = pd.DataFrame({"ego_id": sub["ego_id"].astype(str).to_numpy(), "period": sub["period"].to_numpy(), "month": _month_key(sub["timestamp"])})
    n_months = months.drop_duplicates().groupby(["ego_id", "period"]).size().unstack("period", fill_value=0)
    n_months = n_months.reindex(index=users, columns=range(len(schedule)), fill_value=0)
    need = np.array([required_months(p, share) for p in schedule])
    return n_months >= need[None, :]


def activity_table(frame: pd.DataFrame, schedule: PeriodSchedule, slack_months: float = 6.0) -> pd.DataFrame:
    """Boolean user x period matrix of :func:`is_account_active`."""
    users = sorted(frame["ego_id"].astype(str).unique())
    ego = frame["ego_id"].astype(str)
    ts = frame["timestamp"]
    slack = pd.Timedelta(days=slack_months * DAYS_PER_MONTH)
    cols = {}
    for p in schedule:
        end = pd.Timestamp(p.end)
        before = ts < end
        g = ts[before].groupby(ego[before])
        first, last, n = g.min(), g.max(), g.size()
        ok = n >= 2
        mean_gap = (last - first) / (n - 1).where(ok, 1)
        active = ok & ((end - last) < mean_gap + slack)
        cols[p.index] = active.reindex(users, fill_value=False)
    return pd.DataFrame(cols, index=users).astype(bool)


def longitudinal_cohort(
    frame: pd.DataFrame,
    schedule: PeriodSchedule,
    share: float = 0.5,
    kinds: Sequence[str] = ALL_KINDS,
    slack_months: float = 6.0,
    iqr_multiplier: float = 1.5,
    active_threshold: float = DEFAULT_ACTIVE_THRESHOLD,
    include_quotes: bool = False,
    fence_population: str = "period",
) -> tuple[set[str], CohortFilterReport]:
    """Users regular and active in every period and never a network-size outlier.

    Outlier fences for period k are computed from the active network sizes of
    the users that are regular and active in period k
    (``fence_population="period"``) or of the users regular and active in all
    periods (``"intersection"``).
    """
    if fence_population not in ("period", "intersection"):
        raise ValueError(f"unknown fence population {fence_population!r}")
    report = CohortFilterReport()
    if frame.empty:
        report.per_stage_counts = [
            ("all_users", 0),
            ("regular_all_periods", 0),
            ("regular_and_active_all_periods", 0),
            ("non_outlier", 0),
        ]
        return set(), report
    if "period" not in frame.columns:
        frame = with_periods(frame, schedule)
    users = sorted(frame["ego_id"].astype(str).unique())
    regular = regularity_table(frame, schedule, share, kinds)
    active = activity_table(frame, schedule, slack_months).reindex(index=regular.index, fill_value=False)
    ra = regular & active
    all_regular = regular.all(axis=1)
    core = ra.all(axis=1)

    freq = frequency_table(frame, schedule, include_quotes)
    sizes = active_size_table(freq, active_threshold).reindex(
        index=regular.index, columns=range(len(schedule)), fill_value=0
    )
    outlier = pd.Series(False, index=regular.index)
    for k in range(len(schedule)):
        pop = ra[k] if fence_population == "period" else core
        vals = sizes.loc[pop, k].to_numpy(dtype=float)
        if vals.size == 0:
            continue
        lo, hi = iqr_outlier_fences(vals, iqr_multiplier)
        report.outlier_fences[k] = (float(lo), float(hi))
        flagged = pop & ((sizes[k] < lo) | (sizes[k] > hi))
        report.outliers_per_period[k] = int(flagged.sum())
        outlier |= flagged
    final = core & ~outlier
    report.per_stage_counts = [
        ("all_users", len(users)),
        ("regular_all_periods", int(all_regular.sum())),
        ("regular_and_active_all_periods", int(core.sum())),
        ("non_outlier", int(final.sum())),
    ]
    return set(final.index[final]), report
