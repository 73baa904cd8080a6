"""Semantic ego networks: distinct topics per ego and period from supplied labels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import pandas as pd

from .core import OUTLIER_TOPIC, PeriodSchedule


@dataclass(frozen=True)
class TopicProfile:
    ego_id: str
    period: int
    topics: frozenset
    n_outlier_tweets: int
    n_considered_tweets: int

    @property
    def unique_count(self) -> int:
        return len(self.topics)

    @property
    def empty(self) -> bool:
        return not self.topics


def _topic_rows(frame: pd.DataFrame) -> pd.DataFrame:
    sub = frame[(frame["kind"] != "retweet") & frame["topic"].notna()]
    return sub


def topic_profile(ego: str, period: int, frame: pd.DataFrame) -> TopicProfile:
    """Distinct non-outlier topics over the ego's non-retweet records in ``period``.

    ``frame`` must carry a ``period`` column.
    """
    sub = _topic_rows(frame)
    sub = sub[(sub["ego_id"] == ego) & (sub["period"] == period)]
    labels = sub["topic"].astype(int).to_numpy()
    topics = frozenset(int(t) for t in labels if t >= 0)
    return TopicProfile(ego, period, topics, int(np.sum(labels == OUTLIER_TOPIC)), int(labels.size))


def topic_table(frame: pd.DataFrame) -> pd.DataFrame:
    """Per-(ego, period) unique topic counts and tweet tallies."""
    sub = _topic_rows(frame)
    labels = sub["topic"].astype(int)
    base = pd.DataFrame({"ego": sub["ego_id"].astype(str).to_numpy(), "period": sub["period"].to_numpy(), "topic": labels.to_numpy()})
    g = base.groupby(["ego", "period"])
    out = pd.DataFrame(
        {
            "n_considered_tweets": g.size(),
            "n_outlier_tweets": g["topic"].agg(lambda t: int((t == OUTLIER_TOPIC).sum())),
        }
    )
    valid = base[base["topic"] >= 0]
    out["unique_count"] = valid.groupby(["ego", "period"])["topic"].nunique()
    out["unique_count"] = out["unique_count"].fillna(0).astype(int)
    return out.reset_index()[["ego", "period", "unique_count", "n_outlier_tweets", "n_considered_tweets"]]


def diversity_series(cohort: Iterable[str], schedule: PeriodSchedule, frame: pd.DataFrame) -> pd.DataFrame:
    """User x period matrix of unique topic counts (0 where a user has no labelled tweet)."""
    users = sorted(cohort)
    if not users:
        return pd.DataFrame(index=pd.Index([], name="ego"), columns=range(len(schedule)), dtype=float)
    sub = frame[frame["ego_id"].isin(users)]
    table = topic_table(sub)
    wide = table.pivot(index="ego", columns="period", values="unique_count")
    wide = wide.reindex(index=users, columns=range(len(schedule))).fillna(0)
    wide.index.name = "ego"
    return wide.astype(float)
