"""Pipeline configuration: YAML/JSON file -> validated dataclasses."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict, fields
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

import yaml

from .core import UTC, PeriodSchedule
from .errors import ConfigError
from .synth import ShockConfig


@dataclass
class ScheduleConfig:
    anchor: str = "2015-03-01"
    count: int = 7
    stride_years: float = 1.0

    def build(self) -> PeriodSchedule:
        try:
            anchor = datetime.fromisoformat(str(self.anchor))
        except ValueError as exc:
            raise ConfigError(f"schedule.anchor: {exc}") from exc
        if anchor.tzinfo is None:
            anchor = anchor.replace(tzinfo=UTC)
        try:
            return PeriodSchedule(anchor, int(self.count), float(self.stride_years))
        except ValueError as exc:
            raise ConfigError(f"schedule: {exc}") from exc


@dataclass
class Thresholds:
    active_frequency: float = 1.0
    negative_fraction: float = 0.17
    regular_month_share: float = 0.5
    activity_slack_months: float = 6.0
    iqr_multiplier: float = 1.5


@dataclass
class Alphas:
    structure: float = 0.01
    polarity: float = 0.01
    topics: float = 0.05


@dataclass
class Toggles:
    quotes_in_frequency: bool = False
    neutral_in_denominator: bool = True
    log_scale_meanshift: bool = True


@dataclass
class MeanShiftConfig:
    bandwidth_quantile: float = 0.3
    bandwidth: Optional[float] = None


@dataclass
class StatsConfig:
    ci_level: float = 0.99
    correction: str = "none"


@dataclass
class CohortConfig:
    fence_population: str = "period"


@dataclass
class DbcvConfig:
    sample: Optional[int] = None
    metric: str = "euclidean"


@dataclass
class PipelineConfig:
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    alphas: Alphas = field(default_factory=Alphas)
    toggles: Toggles = field(default_factory=Toggles)
    meanshift: MeanShiftConfig = field(default_factory=MeanShiftConfig)
    stats: StatsConfig = field(default_factory=StatsConfig)
    cohort: CohortConfig = field(default_factory=CohortConfig)
    dbcv: DbcvConfig = field(default_factory=DbcvConfig)
    synth: ShockConfig = field(default_factory=ShockConfig)
    seed: int = 0

    def validate(self) -> "PipelineConfig":
        t, a = self.thresholds, self.alphas
        checks = [
            (t.active_frequency > 0, "thresholds.active_frequency must be > 0"),
            (0 < t.negative_fraction < 1, "thresholds.negative_fraction must be in (0, 1)"),
            (0 < t.regular_month_share <= 1, "thresholds.regular_month_share must be in (0, 1]"),
            (t.activity_slack_months >= 0, "thresholds.activity_slack_months must be >= 0"),
            (t.iqr_multiplier > 0, "thresholds.iqr_multiplier must be > 0"),
            (all(0 < v < 1 for v in (a.structure, a.polarity, a.topics)), "alphas must lie in (0, 1)"),
            (0 < self.meanshift.bandwidth_quantile <= 1, "meanshift.bandwidth_quantile must be in (0, 1]"),
            (self.meanshift.bandwidth is None or self.meanshift.bandwidth > 0, "meanshift.bandwidth must be > 0"),
            (0 < self.stats.ci_level < 1, "stats.ci_level must be in (0, 1)"),
            (self.stats.correction in ("none", "bonferroni"), "stats.correction must be none or bonferroni"),
            (self.cohort.fence_population in ("period", "intersection"), "cohort.fence_population must be period or intersection"),
            (self.dbcv.sample is None or self.dbcv.sample > 0, "dbcv.sample must be positive"),
            (self.schedule.count >= 3, "schedule.count must be at least 3"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        for name in ("quotes_in_frequency", "neutral_in_denominator", "log_scale_meanshift"):
            if not isinstance(getattr(self.toggles, name), bool):
                raise ConfigError(f"toggles.{name} must be true or false")
        schedule = self.schedule.build()
        self.synth.validate(len(schedule))
        return self

    @property
    def period_schedule(self) -> PeriodSchedule:
        return self.schedule.build()

    def to_dict(self) -> dict:
        out = asdict(self)
        out["synth"] = self.synth.to_dict()
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "PipelineConfig":
        data = dict(data or {})
        sections = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(sections)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        for name, value in data.items():
            if name == "seed":
                kwargs[name] = int(value)
            elif name == "synth":
                if not isinstance(value, dict):
                    raise ConfigError("synth must be a mapping")
                kwargs[name] = ShockConfig.from_dict(value)
            else:
                kwargs[name] = _section(sections[name].default_factory, name, value)
        cfg = cls(**kwargs)
        if "synth" not in data:
            cfg.synth = _default_synth(cfg.schedule.count)
        return cfg.validate()

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(data)


def _default_synth(n_periods: int) -> ShockConfig:
    return ShockConfig(
        size_multipliers=(1.0,) * n_periods,
        negative_probability=(0.10,) * n_periods,
        topic_multipliers=(1.0,) * n_periods,
    )


def _section(factory, name: str, value) -> Any:
    if not isinstance(value, dict):
        raise ConfigError(f"{name} must be a mapping")
    default = factory()
    known = {f.name for f in fields(default)}
    unknown = set(value) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    for key, v in value.items():
        current = getattr(default, key)
        if isinstance(current, bool) and not isinstance(v, bool):
            raise ConfigError(f"{name}.{key} must be true or false")
        if isinstance(current, (int, float)) and not isinstance(current, bool):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name}.{key} must be a number")
            v = type(current)(v) if not (isinstance(current, int) and isinstance(v, float) and not v.is_integer()) else v
        setattr(default, key, v)
    return default
