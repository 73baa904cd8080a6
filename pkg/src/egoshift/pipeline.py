"""In-process analysis chain shared by the CLI stages, scripts and tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from .cohort import CohortFilterReport, longitudinal_cohort
from .config import PipelineConfig
from .egonet import EgoNetworkSnapshot, build_snapshots, frequency_table, snapshot_rows
from .ingest import with_periods
from .semantic import topic_table
from .signed import polarity_table, signed_tie_table
from .stats import LockdownReport, MetricSeries, difference_intervals, lockdown_report, period_intervals

METRICS = ("active_size", "n_rings", "pct_negative", "pct_positive", "unique_topics")


def compute_frequencies(frame_p: pd.DataFrame, cfg: PipelineConfig, users: Optional[Iterable[str]] = None) -> pd.DataFrame:
    if users is not None:
        frame_p = frame_p[frame_p["ego_id"].isin(set(users))]
    return frequency_table(frame_p, cfg.period_schedule, cfg.toggles.quotes_in_frequency)


def active_tie_table(freq: pd.DataFrame, cfg: PipelineConfig) -> pd.DataFrame:
    act = freq[freq["frequency"] >= cfg.thresholds.active_frequency]
    return act.reset_index(drop=True)


def compute_snapshots(freq: pd.DataFrame, users: Iterable[str], cfg: PipelineConfig) -> dict[tuple[str, int], EgoNetworkSnapshot]:
    users = sorted(users)
    return build_snapshots(
        freq,
        egos=users,
        threshold=cfg.thresholds.active_frequency,
        log_scale=cfg.toggles.log_scale_meanshift,
        bandwidth=cfg.meanshift.bandwidth,
        periods=range(len(cfg.period_schedule)),
        quantile=cfg.meanshift.bandwidth_quantile,
    )


def compute_cohort(frame_p: pd.DataFrame, cfg: PipelineConfig) -> tuple[list[str], CohortFilterReport]:
    t = cfg.thresholds
    users, report = longitudinal_cohort(
        frame_p,
        cfg.period_schedule,
        share=t.regular_month_share,
        slack_months=t.activity_slack_months,
        iqr_multiplier=t.iqr_multiplier,
        active_threshold=t.active_frequency,
        include_quotes=cfg.toggles.quotes_in_frequency,
        fence_population=cfg.cohort.fence_population,
    )
    return sorted(users), report


def compute_polarity(frame_p: pd.DataFrame, active: pd.DataFrame, cfg: PipelineConfig) -> tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
    """Signed tie table, per-(ego, period) percentages, and ties without labels."""
    signed = signed_tie_table(
        frame_p[frame_p["ego_id"].isin(set(active["ego_id"]))],
        active,
        threshold=cfg.thresholds.negative_fraction,
        neutral_in_denominator=cfg.toggles.neutral_in_denominator,
    )
    pct, excluded = polarity_table(signed)
    return signed, pct, excluded


def compute_topics(frame_p: pd.DataFrame, users: Iterable[str]) -> pd.DataFrame:
    users = set(users)
    return topic_table(frame_p[frame_p["ego_id"].isin(users)])


def metric_series(
    users: Iterable[str],
    n_periods: int,
    sizes: pd.DataFrame,
    polarity: pd.DataFrame,
    topics: pd.DataFrame,
) -> dict[str, MetricSeries]:
    """Wide user x period tables for every tested metric.

    A cohort user without active ties in a period has size 0 there; users
    without labelled ties have no polarity value (missing).  Topic counts
    default to 0.
    """
    users = sorted(users)
    out = {}
    for name, table, column, fill in (
        ("active_size", sizes, "active_size", 0.0),
        ("n_rings", sizes, "n_rings", 0.0),
        ("pct_negative", polarity, "pct_negative", None),
        ("pct_positive", polarity, "pct_positive", None),
        ("unique_topics", topics, "unique_count", 0.0),
    ):
        if table.empty:
            wide = pd.DataFrame(np.nan, index=pd.Index(users, name="ego"), columns=range(n_periods))
        else:
            wide = table.pivot(index="ego", columns="period", values=column).reindex(index=users, columns=range(n_periods))
        if fill is not None:
            wide = wide.fillna(fill)
        wide.index.name = "ego"
        wide.columns.name = "period"
        out[name] = MetricSeries(name, wide.astype(float))
    return out


@dataclass
class Analysis:
    cohort: list[str]
    cohort_report: CohortFilterReport
    sizes: pd.DataFrame
    polarity: pd.DataFrame
    topics: pd.DataFrame
    series: dict[str, MetricSeries]
    report: LockdownReport
    excluded_ties: pd.DataFrame = field(default_factory=pd.DataFrame)

    def rejected(self, metric: str) -> set[tuple[tuple[int, int, int], str]]:
        return {(r.triple, r.hypothesis) for r in self.report.rows if r.metric == metric and r.outcome == "REJECTED"}


def run_stats(series: dict[str, MetricSeries], cfg: PipelineConfig) -> LockdownReport:
    a = cfg.alphas
    return lockdown_report(
        series,
        alphas={"structure": a.structure, "polarity": a.polarity, "topics": a.topics},
        correction=cfg.stats.correction,
    )


def interval_tables(series: dict[str, MetricSeries], level: float) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Per-period means with t intervals and second-difference intervals, one row per metric and period."""
    means, diffs = [], []
    for name, s in series.items():
        for iv in period_intervals(s, level):
            means.append({"metric": name, "period": iv.period, "n": iv.n, "mean": iv.mean, "lower": iv.lower, "upper": iv.upper, "level": level})
        for iv in difference_intervals(s, level):
            diffs.append({"metric": name, "period": iv.period, "n": iv.n, "mean": iv.mean, "lower": iv.lower, "upper": iv.upper, "level": level})
    return pd.DataFrame(means), pd.DataFrame(diffs)


def analyse(frame: pd.DataFrame, cfg: PipelineConfig, cohort: Optional[Iterable[str]] = None) -> Analysis:
    """Cohort selection, ego networks, polarity, topics and t-tests in one call."""
    schedule = cfg.period_schedule
    frame_p = frame if "period" in frame.columns else with_periods(frame, schedule)
    if cohort is None:
        users, creport = compute_cohort(frame_p, cfg)
    else:
        users, creport = sorted(cohort), CohortFilterReport()
    freq = compute_frequencies(frame_p, cfg, users)
    snaps = compute_snapshots(freq, users, cfg)
    sizes = snapshot_rows(snaps.values())
    active = active_tie_table(freq, cfg)
    _, pct, excluded = compute_polarity(frame_p, active, cfg)
    topics = compute_topics(frame_p, users)
    series = metric_series(users, len(schedule), sizes, pct, topics)
    return Analysis(users, creport, sizes, pct, topics, series, run_stats(series, cfg), excluded)
