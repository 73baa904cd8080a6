"""Shared vocabulary: observation periods, interaction kinds, polarity labels, records."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np
import pandas as pd
from dateutil.relativedelta import relativedelta

UTC = timezone.utc


class InteractionKind(str, Enum):
    REPLY = "reply"
    MENTION = "mention"
    RETWEET = "retweet"
    QUOTE = "quote"


class PolarityLabel(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


ALL_KINDS = tuple(k.value for k in InteractionKind)
# kinds counted in the contact-frequency numerator
FREQUENCY_KINDS = ("reply", "mention", "retweet")
OUTLIER_TOPIC = -1


def as_utc(t: datetime) -> datetime:
    """Naive datetimes are taken to be UTC; aware ones are converted."""
    if t.tzinfo is None:
        return t.replace(tzinfo=UTC)
    return t.astimezone(UTC)


@dataclass(frozen=True)
class Period:
    index: int
    start: datetime
    end: datetime
    length_years: float

    def __post_init__(self):
        if not self.end > self.start:
            raise ValueError("period end must be after start")
        if self.length_years <= 0:
            raise ValueError("length_years must be positive")

    def contains(self, t: datetime) -> bool:
        return self.start <= as_utc(t) < self.end

    @property
    def label(self) -> str:
        return f"I_{self.index}"

    def months(self) -> list[tuple[int, int]]:
        """Calendar (year, month) pairs overlapping the period."""
        out = []
        cur = datetime(self.start.year, self.start.month, 1, tzinfo=UTC)
        while cur < self.end:
            out.append((cur.year, cur.month))
            cur = cur + relativedelta(months=1)
        return out


@dataclass(frozen=True)
class PeriodSchedule:
    """Contiguous calendar periods starting at ``anchor``.

    Period ``k`` starts at ``anchor + k * stride_years`` using calendar month
    arithmetic, so the stride must be a whole number of months.  The defaults
    give the yearly windows I_0..I_6 running from March 1, 2015 to March 1, 2022.
    """

    anchor: datetime = datetime(2015, 3, 1, tzinfo=UTC)
    count: int = 7
    stride_years: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "anchor", as_utc(self.anchor))
        if self.count < 1:
            raise ValueError("schedule needs at least one period")
        months = self.stride_years * 12
        if self.stride_years <= 0 or abs(months - round(months)) > 1e-9:
            raise ValueError("stride_years must be a positive whole number of months")

    @property
    def stride_months(self) -> int:
        return int(round(self.stride_years * 12))

    @cached_property
    def periods(self) -> tuple[Period, ...]:
        out = []
        for k in range(self.count):
            start = self.anchor + relativedelta(months=k * self.stride_months)
            end = self.anchor + relativedelta(months=(k + 1) * self.stride_months)
            out.append(Period(k, start, end, self.stride_months / 12.0))
        return tuple(out)

    @cached_property
    def boundaries(self) -> tuple[datetime, ...]:
        return tuple(p.start for p in self.periods) + (self.periods[-1].end,)

    @property
    def start(self) -> datetime:
        return self.boundaries[0]

    @property
    def end(self) -> datetime:
        return self.boundaries[-1]

    def __len__(self):
        return self.count

    def __iter__(self):
        return iter(self.periods)

    def __getitem__(self, k: int) -> Period:
        return self.periods[k]

    def index_of(self, t: datetime) -> Optional[int]:
        t = as_utc(t)
        if t < self.start or t >= self.end:
            return None
        return bisect.bisect_right(self.boundaries, t) - 1

    def assign(self, timestamps: pd.Series) -> np.ndarray:
        """Vectorised period index per timestamp, -1 outside the span."""
        edges = pd.DatetimeIndex(list(self.boundaries)).as_unit("ns").asi8
        ts = pd.DatetimeIndex(pd.to_datetime(timestamps, utc=True)).as_unit("ns").asi8
        idx = np.searchsorted(edges, ts, side="right") - 1
        idx[(ts < edges[0]) | (ts >= edges[-1])] = -1
        return idx

    def to_dict(self) -> dict:
        return {
            "anchor": self.anchor.date().isoformat(),
            "count": self.count,
            "stride_years": self.stride_years,
        }


def period_of(t: datetime, schedule: PeriodSchedule) -> Optional[Period]:
    """Period containing ``t`` (start-inclusive, end-exclusive), or None."""
    k = schedule.index_of(t)
    return None if k is None else schedule[k]


@dataclass(frozen=True)
class InteractionRecord:
    ego_id: str
    alter_id: str
    timestamp: datetime
    kind: InteractionKind
    polarity: Optional[PolarityLabel] = None
    topic: Optional[int] = None
    text: Optional[str] = None
    record_id: Optional[str] = field(default=None, compare=True)

    def __post_init__(self):
        object.__setattr__(self, "timestamp", as_utc(self.timestamp))
        object.__setattr__(self, "kind", InteractionKind(self.kind))
        if self.polarity is not None:
            object.__setattr__(self, "polarity", PolarityLabel(self.polarity))
