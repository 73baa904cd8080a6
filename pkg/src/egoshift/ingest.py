"""Reading interaction logs, text clean-up and the record store.

Input layout (JSON lines, one object per line; the CSV variant uses the same
column names)::

    {"id": "r1", "ego_id": "alice", "alter_id": "bob",
     "timestamp": "2020-03-01T12:00:00Z", "kind": "reply",
     "polarity": "negative", "topic": 12, "text": "..."}

``id``, ``polarity``, ``topic`` and ``text`` are optional.  Timestamps without
an offset are read as UTC.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field, asdict
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from .core import (
    InteractionKind,
    InteractionRecord,
    PeriodSchedule,
    PolarityLabel,
    as_utc,
)
from .errors import DataError

log = logging.getLogger(__name__)

# whitespace-delimited tokens matching any of these are dropped from tweet text
MEDIA_PATTERNS: tuple[str, ...] = (
    r"https?://\S+",
    r"(?:^|\W)t\.co/\S+",
    r"(?:^|\W)pic\.twitter\.com/\S+",
)

FRAME_COLUMNS = ["record_id", "ego_id", "alter_id", "timestamp", "kind", "polarity", "topic", "text"]


@dataclass
class CorpusStats:
    total_records: int = 0
    malformed: int = 0
    dropped_self_loops: int = 0
    dropped_out_of_span: int = 0
    dropped_retweets_for_text: int = 0
    dropped_empty_text: int = 0
    dropped_duplicates: int = 0
    per_period_counts: dict[int, int] = field(default_factory=dict)

    @property
    def retained(self) -> int:
        return sum(self.per_period_counts.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_period_counts"] = {str(k): v for k, v in sorted(self.per_period_counts.items())}
        d["retained"] = self.retained
        return d


@dataclass(frozen=True)
class CorpusEntry:
    ego_id: str
    period: int
    text: str
    timestamp: datetime
    kind: InteractionKind


# --------------------------------------------------------------------------
# timestamps


def parse_timestamp(value: str) -> datetime:
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    return as_utc(datetime.fromisoformat(s))


def format_timestamp(t: datetime) -> str:
    t = as_utc(t)
    out = t.strftime("%Y-%m-%dT%H:%M:%S")
    if t.microsecond:
        out += f".{t.microsecond:06d}"
    return out + "Z"


# --------------------------------------------------------------------------
# parsing


def _optional(value):
    if value is None:
        return None
    if isinstance(value, str) and value == "":
        return None
    return value


def _parse_topic(value) -> Optional[int]:
    value = _optional(value)
    if value is None:
        return None
    if isinstance(value, bool):
        raise ValueError("topic must be an integer")
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError("topic must be an integer")
        return int(value)
    return int(value)


def record_from_mapping(row: dict) -> InteractionRecord:
    """Build one record from a decoded JSON object or CSV row; raises on bad input."""
    ego = _optional(row.get("ego_id"))
    alter = _optional(row.get("alter_id"))
    if ego is None or alter is None:
        raise ValueError("ego_id and alter_id are required")
    ts = row.get("timestamp")
    if not isinstance(ts, str):
        raise ValueError("timestamp must be an RFC 3339 string")
    kind = InteractionKind(str(row.get("kind", "")).strip().lower())
    polarity = _optional(row.get("polarity"))
    if polarity is not None:
        polarity = PolarityLabel(str(polarity).strip().lower())
    if kind is InteractionKind.RETWEET:
        polarity = PolarityLabel.NEUTRAL
    rid = _optional(row.get("id", row.get("record_id")))
    text = _optional(row.get("text"))
    return InteractionRecord(
        ego_id=str(ego),
        alter_id=str(alter),
        timestamp=parse_timestamp(ts),
        kind=kind,
        polarity=polarity,
        topic=_parse_topic(row.get("topic")),
        text=None if text is None else str(text),
        record_id=None if rid is None else str(rid),
    )


def _open_lines(source) -> tuple[Iterable[str], Optional[str]]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            handle = path.open("r", encoding="utf-8", newline="")
        except OSError as exc:
            raise DataError(f"cannot read interaction log {path}: {exc}") from exc
        return handle, path.suffix.lower()
    return source, None


def _rows(lines: Iterable[str], fmt: str):
    """Yield (line_no, mapping-or-exception) pairs."""
    if fmt == "csv":
        reader = csv.DictReader(lines)
        for i, row in enumerate(reader, start=2):
            yield i, row
        return
    for i, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            yield i, obj
        except ValueError as exc:
            yield i, exc


def parse_interactions(
    source,
    schedule: Optional[PeriodSchedule] = None,
    fmt: Optional[str] = None,
) -> tuple[list[InteractionRecord], CorpusStats]:
    """Parse a line-delimited interaction log.

    ``source`` is a path or an iterable of text lines.  Malformed lines are
    skipped with a warning, self-interactions are dropped and retweets have
    their polarity forced to neutral.  With a ``schedule``, records outside
    its span are dropped and counted.
    """
    lines, suffix = _open_lines(source)
    if fmt is None:
        fmt = "csv" if suffix == ".csv" else "jsonl"
    stats = CorpusStats()
    per_period: Counter = Counter()
    records: list[InteractionRecord] = []
    try:
        for line_no, row in _rows(lines, fmt):
            stats.total_records += 1
            try:
                if isinstance(row, Exception):
                    raise row
                rec = record_from_mapping(row)
            except (ValueError, TypeError) as exc:
                stats.malformed += 1
                log.warning("skipping malformed line %d: %s", line_no, exc)
                continue
            if rec.ego_id == rec.alter_id:
                stats.dropped_self_loops += 1
                continue
            k = 0
            if schedule is not None:
                k = schedule.index_of(rec.timestamp)
                if k is None:
                    stats.dropped_out_of_span += 1
                    continue
            per_period[k] += 1
            records.append(rec)
    finally:
        if hasattr(lines, "close") and suffix is not None:
            lines.close()
    stats.per_period_counts = dict(sorted(per_period.items()))
    return records, stats


# --------------------------------------------------------------------------
# serialisation


def record_to_mapping(rec: InteractionRecord) -> dict:
    return {
        "id": rec.record_id,
        "ego_id": rec.ego_id,
        "alter_id": rec.alter_id,
        "timestamp": format_timestamp(rec.timestamp),
        "kind": rec.kind.value,
        "polarity": None if rec.polarity is None else rec.polarity.value,
        "topic": rec.topic,
        "text": rec.text,
    }


def dumps_record(rec: InteractionRecord) -> str:
    return json.dumps(record_to_mapping(rec), ensure_ascii=False, separators=(",", ":"))


def write_records(records: Iterable[InteractionRecord], fh: io.TextIOBase) -> int:
    n = 0
    for rec in records:
        fh.write(dumps_record(rec))
        fh.write("\n")
        n += 1
    return n


# --------------------------------------------------------------------------
# text corpus


def preprocess_text(raw: Optional[str], patterns: Sequence[str] = MEDIA_PATTERNS) -> str:
    """Drop link and media-reference tokens and collapse whitespace."""
    if not raw:
        return ""
    compiled = [re.compile(p) for p in patterns]
    kept = [tok for tok in raw.split() if not any(c.search(tok) for c in compiled)]
    return " ".join(kept)


def build_text_corpus(
    records: Iterable,
    schedule: PeriodSchedule,
    patterns: Sequence[str] = MEDIA_PATTERNS,
    dedup_scope: str = "global",
) -> tuple[list[CorpusEntry], CorpusStats]:
    """Text entries of non-retweet records after link removal and de-duplication.

    Duplicates are exact matches of the cleaned text.  ``dedup_scope`` is
    ``"global"`` (across all users and periods, first occurrence kept) or
    ``"ego_period"``.  Accepts records or previously built entries.
    """
    if dedup_scope not in ("global", "ego_period"):
        raise ValueError(f"unknown dedup scope {dedup_scope!r}")
    stats = CorpusStats()
    per_period: Counter = Counter()
    seen: set = set()
    out: list[CorpusEntry] = []
    for rec in records:
        stats.total_records += 1
        kind = InteractionKind(rec.kind)
        if kind is InteractionKind.RETWEET:
            stats.dropped_retweets_for_text += 1
            continue
        k = schedule.index_of(rec.timestamp)
        if k is None:
            stats.dropped_out_of_span += 1
            continue
        text = preprocess_text(rec.text, patterns)
        if not text:
            stats.dropped_empty_text += 1
            continue
        key = text if dedup_scope == "global" else (rec.ego_id, k, text)
        if key in seen:
            stats.dropped_duplicates += 1
            continue
        seen.add(key)
        per_period[k] += 1
        out.append(CorpusEntry(rec.ego_id, k, text, as_utc(rec.timestamp), kind))
    stats.per_period_counts = dict(sorted(per_period.items()))
    return out, stats


# --------------------------------------------------------------------------
# tabular record store


def records_to_frame(records: Sequence[InteractionRecord]) -> pd.DataFrame:
    data = {
        "record_id": [r.record_id for r in records],
        "ego_id": [r.ego_id for r in records],
        "alter_id": [r.alter_id for r in records],
        "timestamp": pd.to_datetime([r.timestamp for r in records], utc=True),
        "kind": [r.kind.value for r in records],
        "polarity": [None if r.polarity is None else r.polarity.value for r in records],
        "topic": pd.array([r.topic for r in records], dtype="Int64"),
        "text": [r.text for r in records],
    }
    return normalize_frame(pd.DataFrame(data, columns=FRAME_COLUMNS))


def normalize_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Coerce a record table to the store schema (missing optional columns allowed)."""
    frame = frame.copy()
    for col in FRAME_COLUMNS:
        if col not in frame.columns:
            frame[col] = None
    frame["timestamp"] = pd.to_datetime(frame["timestamp"], utc=True).dt.as_unit("ns")
    frame["topic"] = pd.array(frame["topic"], dtype="Int64")
    retweet = frame["kind"].to_numpy() == "retweet"
    if retweet.any():
        frame.loc[retweet, "polarity"] = "neutral"
    return frame[FRAME_COLUMNS].reset_index(drop=True)


def frame_to_records(frame: pd.DataFrame) -> list[InteractionRecord]:
    out = []
    topics = frame["topic"].to_numpy(dtype=object, na_value=None)
    for i, row in enumerate(frame.itertuples(index=False)):
        out.append(
            InteractionRecord(
                ego_id=row.ego_id,
                alter_id=row.alter_id,
                timestamp=row.timestamp.to_pydatetime(),
                kind=row.kind,
                polarity=row.polarity if isinstance(row.polarity, str) else None,
                topic=None if topics[i] is None else int(topics[i]),
                text=row.text if isinstance(row.text, str) else None,
                record_id=row.record_id if isinstance(row.record_id, str) else None,
            )
        )
    return out


def _json_col(values) -> list[str]:
    return [json.dumps(v, ensure_ascii=False) if v is not None else "null" for v in values]


def write_store(frame: pd.DataFrame, fh: io.TextIOBase) -> int:
    """Write a record table as canonical JSON lines (same layout as :func:`write_records`)."""
    if frame.empty:
        return 0
    ts = frame["timestamp"]
    stamp = ts.dt.strftime("%Y-%m-%dT%H:%M:%S")
    us = ts.dt.microsecond.to_numpy()
    if us.any():
        frac = pd.Series([f".{u:06d}" if u else "" for u in us], index=stamp.index)
        stamp = stamp + frac
    stamp = stamp + "Z"

    def clean(col):
        return [v if isinstance(v, str) else None for v in frame[col].tolist()]

    rid = _json_col(clean("record_id"))
    ego = _json_col(frame["ego_id"].astype(str).tolist())
    alt = _json_col(frame["alter_id"].astype(str).tolist())
    kind = _json_col(frame["kind"].astype(str).tolist())
    pol = _json_col(clean("polarity"))
    topic = ["null" if v is None else str(int(v)) for v in frame["topic"].to_numpy(dtype=object, na_value=None)]
    text = _json_col(clean("text"))
    n = 0
    for parts in zip(rid, ego, alt, stamp.tolist(), kind, pol, topic, text):
        fh.write(
            '{"id":%s,"ego_id":%s,"alter_id":%s,"timestamp":"%s","kind":%s,'
            '"polarity":%s,"topic":%s,"text":%s}\n' % parts
        )
        n += 1
    return n


def read_store(path) -> pd.DataFrame:
    """Load a canonical store written by :func:`write_store` or :func:`write_records`."""
    path = Path(path)
    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read record store {path}: {exc}") from exc
    cols: dict[str, list] = {c: [] for c in ("id", "ego_id", "alter_id", "timestamp", "kind", "polarity", "topic", "text")}
    with fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: corrupt record store line") from exc
            for c in cols:
                cols[c].append(obj.get(c))
    frame = pd.DataFrame(
        {
            "record_id": cols["id"],
            "ego_id": cols["ego_id"],
            "alter_id": cols["alter_id"],
            "timestamp": pd.to_datetime(cols["timestamp"], utc=True, format="ISO8601"),
            "kind": cols["kind"],
            "polarity": cols["polarity"],
            "topic": pd.array(cols["topic"], dtype="Int64"),
            "text": cols["text"],
        }
    )
    return normalize_frame(frame)


def with_periods(frame: pd.DataFrame, schedule: PeriodSchedule) -> pd.DataFrame:
    """Copy of the store with a ``period`` column, records outside the span removed."""
    idx = schedule.assign(frame["timestamp"])
    out = frame.assign(period=idx)
    return out[out["period"] >= 0].reset_index(drop=True)


# --------------------------------------------------------------------------
# topic sidecar


def read_topic_sidecar(path) -> dict[str, int]:
    """CSV with columns ``id,topic`` mapping record ids to topic labels."""
    path = Path(path)
    try:
        table = pd.read_csv(path, dtype={"id": str})
    except OSError as exc:
        raise DataError(f"cannot read topic sidecar {path}: {exc}") from exc
    if not {"id", "topic"} <= set(table.columns):
        raise DataError(f"topic sidecar {path} needs columns id,topic")
    return {str(k): int(v) for k, v in zip(table["id"], table["topic"])}


def apply_topic_sidecar(frame: pd.DataFrame, labels: dict[str, int]) -> pd.DataFrame:
    out = frame.copy()
    mapped = out["record_id"].map(lambda r: labels.get(r) if isinstance(r, str) else None)
    mask = mapped.notna().to_numpy()
    topic = out["topic"].to_numpy(dtype=object, na_value=None)
    topic[mask] = mapped[mask].astype(int).to_numpy()
    out["topic"] = pd.array(list(topic), dtype="Int64")
    return out
