"""Synthetic interaction cohorts with planted layers, polarity and topic shocks.

Each ego owns a fixed set of alters split into layers with decreasing
contact rates.  Per (ego, alter, period) the event count is Poisson with the
alter's rate times the period's intensity multiplier; every event gets a
kind, a uniform timestamp inside the period, an i.i.d. polarity label and a
topic drawn uniformly from that period's topic pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats as sps

from .core import ALL_KINDS, OUTLIER_TOPIC, PeriodSchedule
from .errors import ConfigError
from .ingest import FRAME_COLUMNS

KIND_CODES = np.array(ALL_KINDS, dtype=object)  # reply, mention, retweet, quote
POLARITY_CODES = np.array(["positive", "negative", "neutral"], dtype=object)


@dataclass
class ShockConfig:
    n_users: int = 200
    layer_sizes: tuple = (3, 6, 15, 40)
    layer_rates: tuple = (20.0, 8.0, 3.0, 1.0)  # events per year
    rate_spread: float = 0.1  # relative jitter of per-alter rates
    size_sd: float = 0.2  # log-sd of the per-ego layer-size scale
    max_alters: int = 400
    size_multipliers: tuple = (1.0,) * 7  # scales every Poisson rate per period
    negative_probability: tuple = (0.10,) * 7
    neutral_probability: float = 0.2
    kind_mix: tuple = (0.4, 0.3, 0.2, 0.1)
    topic_pool: int = 100
    topic_multipliers: tuple = (1.0,) * 7
    outlier_probability: float = 0.3
    seed: int = 0

    def __post_init__(self):
        for name in ("layer_sizes", "layer_rates", "size_multipliers", "negative_probability", "kind_mix", "topic_multipliers"):
            setattr(self, name, tuple(getattr(self, name)))

    def validate(self, n_periods: Optional[int] = None) -> None:
        if self.n_users < 1:
            raise ConfigError("n_users must be positive")
        if len(self.layer_sizes) != len(self.layer_rates) or not self.layer_sizes:
            raise ConfigError("layer_sizes and layer_rates must have the same non-zero length")
        if any(s < 1 for s in self.layer_sizes):
            raise ConfigError("layer sizes must be positive")
        if any(r <= 0 for r in self.layer_rates):
            raise ConfigError("layer rates must be positive")
        if any(a <= b for a, b in zip(self.layer_rates, self.layer_rates[1:])):
            raise ConfigError("layer rates must strictly decrease outward")
        if not 0 <= self.rate_spread < 1:
            raise ConfigError("rate_spread must be in [0, 1)")
        per_period = (self.size_multipliers, self.negative_probability, self.topic_multipliers)
        if len({len(v) for v in per_period}) != 1:
            raise ConfigError("per-period settings differ in length")
        if n_periods is not None and len(self.size_multipliers) != n_periods:
            raise ConfigError(f"per-period settings cover {len(self.size_multipliers)} periods, schedule has {n_periods}")
        if any(m <= 0 for m in self.size_multipliers + self.topic_multipliers):
            raise ConfigError("multipliers must be positive")
        if any(not 0 <= p <= 1 for p in self.negative_probability):
            raise ConfigError("negative probabilities must lie in [0, 1]")
        if any(p + self.neutral_probability > 1 for p in self.negative_probability):
            raise ConfigError("negative plus neutral probability exceeds 1")
        if len(self.kind_mix) != 4 or any(w < 0 for w in self.kind_mix) or not math.isclose(sum(self.kind_mix), 1.0):
            raise ConfigError("kind_mix needs four non-negative weights summing to 1")
        if self.topic_pool < 1 or not 0 <= self.outlier_probability < 1:
            raise ConfigError("topic pool must be positive and outlier probability in [0, 1)")
        # worst case of the per-ego size scale at three log-sds
        worst = sum(self.layer_sizes) * math.exp(3 * self.size_sd)
        if worst > self.max_alters:
            raise ConfigError(f"layer sizes (up to {worst:.0f} alters) exceed the alter pool of {self.max_alters}")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ShockConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown synth keys: {sorted(extra)}")
        return cls(**data)


def lockdown_scenario(n_users: int = 1000, seed: int = 0, shock_period: int = 5, n_periods: int = 7, **overrides) -> ShockConfig:
    """Size x1.5 and negativity 0.10 -> 0.18 during ``shock_period`` only."""
    size = [1.0] * n_periods
    neg = [0.10] * n_periods
    size[shock_period] = 1.5
    neg[shock_period] = 0.18
    base = dict(n_users=n_users, seed=seed, size_multipliers=size, negative_probability=neg, topic_multipliers=[1.0] * n_periods)
    base.update(overrides)
    return ShockConfig(**base)


def topic_surge_scenario(n_users: int = 1000, seed: int = 0, shock_period: int = 5, n_periods: int = 7, surge: float = 1.5, **overrides) -> ShockConfig:
    topics = [1.0] * n_periods
    topics[shock_period] = surge
    base = dict(n_users=n_users, seed=seed, size_multipliers=[1.0] * n_periods, negative_probability=[0.10] * n_periods, topic_multipliers=topics)
    base.update(overrides)
    return ShockConfig(**base)


def null_scenario(n_users: int = 1000, seed: int = 0, n_periods: int = 7, **overrides) -> ShockConfig:
    base = dict(n_users=n_users, seed=seed, size_multipliers=[1.0] * n_periods, negative_probability=[0.10] * n_periods, topic_multipliers=[1.0] * n_periods)
    base.update(overrides)
    return ShockConfig(**base)


@dataclass
class GroundTruth:
    config: dict
    alter_layer: dict[str, dict[str, int]] = field(default_factory=dict)  # ego -> alter -> layer
    alter_rate: dict[str, dict[str, float]] = field(default_factory=dict)
    topic_pools: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "topic_pools": self.topic_pools,
            "egos": {
                ego: {"layers": self.alter_layer[ego], "rates": self.alter_rate[ego]} for ego in sorted(self.alter_layer)
            },
        }


def ego_name(i: int) -> str:
    return f"u{i:05d}"


def topic_pools(config: ShockConfig) -> list[int]:
    return [max(1, int(round(config.topic_pool * m))) for m in config.topic_multipliers]


def _ego_events(i: int, config: ShockConfig, schedule: PeriodSchedule, pools: Sequence[int]):
    rng = np.random.default_rng([config.seed, i])
    scale = math.exp(rng.normal(0.0, config.size_sd)) if config.size_sd > 0 else 1.0
    sizes = [max(1, int(round(s * scale))) for s in config.layer_sizes]
    layer = np.repeat(np.arange(len(sizes)), sizes)
    rates = np.asarray(config.layer_rates)[layer] * (1 + rng.uniform(-config.rate_spread, config.rate_spread, layer.size))
    n_alt = layer.size
    out = []
    for p in schedule:
        lam = rates * config.size_multipliers[p.index] * p.length_years
        counts = rng.poisson(lam)
        n = int(counts.sum())
        if n == 0:
            continue
        alter_idx = np.repeat(np.arange(n_alt), counts)
        kinds = rng.choice(4, size=n, p=config.kind_mix)
        start = int(pd.Timestamp(p.start).value // 10**9)
        span = int((pd.Timestamp(p.end) - pd.Timestamp(p.start)).total_seconds())
        secs = start + rng.integers(0, span, size=n)
        u = rng.random(n)
        p_neg = config.negative_probability[p.index]
        pol = np.where(u < p_neg, 1, np.where(u < p_neg + config.neutral_probability, 2, 0))
        pol[kinds == 2] = 2  # retweets are neutral
        topic = rng.integers(0, pools[p.index], size=n)
        topic[rng.random(n) < config.outlier_probability] = OUTLIER_TOPIC
        out.append((alter_idx, kinds, secs, pol, topic))
    return layer, rates, out


def generate_cohort(config: ShockConfig, schedule: Optional[PeriodSchedule] = None) -> tuple[pd.DataFrame, GroundTruth]:
    """Record table in store layout plus the planted ground truth."""
    schedule = schedule or PeriodSchedule()
    config.validate(len(schedule))
    pools = topic_pools(config)
    truth = GroundTruth(config.to_dict(), topic_pools=pools)
    cols = {k: [] for k in ("ego", "alter", "kind", "secs", "pol", "topic")}
    for i in range(config.n_users):
        ego = ego_name(i)
        layer, rates, events = _ego_events(i, config, schedule, pools)
        alters = np.array([f"{ego}-a{j:03d}" for j in range(layer.size)], dtype=object)
        truth.alter_layer[ego] = {a: int(l) for a, l in zip(alters, layer)}
        truth.alter_rate[ego] = {a: float(r) for a, r in zip(alters, rates)}
        for alter_idx, kinds, secs, pol, topic in events:
            cols["ego"].append(np.full(alter_idx.size, ego, dtype=object))
            cols["alter"].append(alters[alter_idx])
            cols["kind"].append(kinds)
            cols["secs"].append(secs)
            cols["pol"].append(pol)
            cols["topic"].append(topic)
    if not cols["ego"]:
        return pd.DataFrame(columns=FRAME_COLUMNS), truth
    cat = {k: np.concatenate(v) for k, v in cols.items()}
    frame = pd.DataFrame(
        {
            "ego_id": cat["ego"],
            "alter_id": cat["alter"],
            "timestamp": pd.to_datetime(cat["secs"], unit="s", utc=True).as_unit("ns"),
            "kind": KIND_CODES[cat["kind"]],
            "polarity": POLARITY_CODES[cat["pol"]],
            "topic": pd.array(cat["topic"], dtype="Int64"),
            "text": None,
        }
    )
    frame = frame.sort_values(["ego_id", "timestamp", "alter_id"], kind="stable").reset_index(drop=True)
    frame.insert(0, "record_id", [f"s{config.seed}-{k:08d}" for k in range(len(frame))])
    return frame[FRAME_COLUMNS], truth


# --------------------------------------------------------------------------
# planted frequency profiles and closed-form expectations


def planted_profile(
    rng: np.random.Generator,
    sizes: Sequence[int] = (5, 10, 35, 100),
    centers: Sequence[float] = (80.0, 20.0, 5.0, 1.25),
    rel_spread: float = 0.05,
) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies drawn uniformly within ``center * (1 +- rel_spread)``; label 0 is the innermost layer."""
    vals, labs = [], []
    for k, (n, c) in enumerate(zip(sizes, centers)):
        vals.append(c * (1 + rng.uniform(-rel_spread, rel_spread, n)))
        labs.append(np.full(n, k))
    return np.concatenate(vals), np.concatenate(labs)


def profile_gap_ratio(centers: Sequence[float], rel_spread: float) -> float:
    """Smallest ratio of the gap between adjacent layers to the wider of the two layer ranges."""
    c = sorted(centers, reverse=True)
    if rel_spread == 0:
        return math.inf
    ratios = [(a * (1 - rel_spread) - b * (1 + rel_spread)) / (2 * rel_spread * a) for a, b in zip(c, c[1:])]
    return min(ratios)


def _tie_outcome_probs(lam: float, config: ShockConfig, p_neg: float, threshold: float, active_threshold: float, include_quotes: bool):
    """P(tie active) and P(tie active and negative) for one alter with total rate ``lam``.

    Summed over s non-retweet events (replies, mentions, quotes) and r
    retweets; only the s events can be negative.
    """
    w = dict(zip(ALL_KINDS, config.kind_mix))
    rate_s = lam * (w["reply"] + w["mention"] + w["quote"])
    rate_r = lam * w["retweet"]
    top = int(lam + 12 * math.sqrt(lam) + 20)
    k = np.arange(top + 1)
    f_s = sps.poisson.pmf(k, rate_s)
    f_r = sps.poisson.pmf(k, rate_r)
    quote_share = w["quote"] / (w["reply"] + w["mention"] + w["quote"]) if rate_s > 0 else 0.0
    need = math.ceil(active_threshold - 1e-12)
    s, r = np.meshgrid(k, k, indexing="ij")
    weight = f_s[:, None] * f_r[None, :]
    total = s + r
    # P(count entering the frequency >= need | s, r); quotes are binomial within s
    if include_quotes:
        p_act = (total >= need).astype(float)
    else:
        p_act = sps.binom.sf(need - 1 - r, s, 1.0 - quote_share)
        p_act = np.where(need - r <= 0, 1.0, p_act)
    # largest negative count that still keeps the tie positive: n_neg / total <= threshold
    m = np.floor(threshold * total + 1e-9)
    m = np.where((m > 0) & (m / np.maximum(total, 1) > threshold), m - 1, m)
    p_sign = sps.binom.sf(m, s, p_neg)
    p_sign = np.where(total > 0, p_sign, 0.0)
    return float(np.sum(weight * p_act)), float(np.sum(weight * p_act * p_sign))


def expected_pct_negative(config: ShockConfig, period: int, threshold: float = 0.17, active_threshold: float = 1.0, include_quotes: bool = False, length_years: float = 1.0) -> float:
    """Ratio-of-expectations estimate of the cohort mean pct_negative in ``period``.

    Layer rates use their nominal values (the per-alter jitter is ignored).
    """
    p_neg = config.negative_probability[period]
    num = den = 0.0
    for size, rate in zip(config.layer_sizes, config.layer_rates):
        lam = rate * config.size_multipliers[period] * length_years
        pa, pn = _tie_outcome_probs(lam, config, p_neg, threshold, active_threshold, include_quotes)
        num += size * pn
        den += size * pa
    return 100.0 * num / den


def expected_unique_topics(n_tweets: int, pool: int) -> float:
    """Coupon-collector mean of distinct labels among ``n_tweets`` uniform draws."""
    return pool * (1.0 - (1.0 - 1.0 / pool) ** n_tweets)
