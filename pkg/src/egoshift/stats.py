"""Growth rates, their second differences and one-sided t-tests around a shock period."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .tdist import t_cdf, t_ppf

H0_MINUS = "H0_minus"  # mean second difference <= 0
H0_PLUS = "H0_plus"  # mean second difference >= 0
HYPOTHESES = (H0_MINUS, H0_PLUS)

ACCEPTED = "ACCEPTED"
REJECTED = "REJECTED"

# alpha family per metric; the families default to 1% / 1% / 5%
METRIC_FAMILY = {
    "active_size": "structure",
    "n_rings": "structure",
    "pct_negative": "polarity",
    "pct_positive": "polarity",
    "unique_topics": "topics",
}
DEFAULT_ALPHAS = {"structure": 0.01, "polarity": 0.01, "topics": 0.05}


@dataclass
class MetricSeries:
    """User x period table of one metric; NaN marks a missing observation."""

    name: str
    values: pd.DataFrame

    @classmethod
    def from_long(cls, name: str, table: pd.DataFrame, column: str, users=None, n_periods=None) -> "MetricSeries":
        wide = table.pivot(index="ego", columns="period", values=column)
        if users is not None:
            wide = wide.reindex(index=sorted(users))
        if n_periods is not None:
            wide = wide.reindex(columns=range(n_periods))
        wide.index.name = "ego"
        return cls(name, wide.astype(float))

    @property
    def n_periods(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GrowthTriple:
    user: str
    i: int
    g_prev: float
    g_next: float
    d: float


@dataclass
class GrowthDifferences:
    triples: list[GrowthTriple]
    excluded_zero_base: dict[int, int] = field(default_factory=dict)
    excluded_missing: dict[int, int] = field(default_factory=dict)

    def sample(self, i: int) -> np.ndarray:
        return np.array([t.d for t in self.triples if t.i == i])


@dataclass(frozen=True)
class TTestResult:
    triple: tuple[int, int, int]
    hypothesis: str
    n: int
    mean: float
    t_stat: float
    p_value: float
    alpha: float
    outcome: str
    degenerate: bool = False
    metric: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["triple"] = list(self.triple)
        return d


@dataclass(frozen=True)
class IntervalEstimate:
    period: int
    mean: float
    lower: float
    upper: float
    level: float
    n: int = 0


def growth_rate(x_i: float, x_next: float) -> Optional[float]:
    """Relative change from ``x_i`` to ``x_next``; None when the base is zero."""
    if x_i == 0:
        return None
    return (x_next - x_i) / x_i


def growth_second_difference(series: MetricSeries) -> GrowthDifferences:
    """Per-user differences of consecutive growth rates at every interior period.

    A user drops out of period ``i`` when any of the three values is missing
    or when one of the two growth rates has a zero base.
    """
    if series.n_periods < 3:
        raise ValueError("need at least three periods")
    vals = series.values.to_numpy(dtype=float)
    users = [str(u) for u in series.values.index]
    out = GrowthDifferences([])
    for i in range(1, series.n_periods - 1):
        prev, cur, nxt = vals[:, i - 1], vals[:, i], vals[:, i + 1]
        missing = np.isnan(prev) | np.isnan(cur) | np.isnan(nxt)
        zero = ~missing & ((prev == 0) | (cur == 0))
        out.excluded_missing[i] = int(missing.sum())
        out.excluded_zero_base[i] = int(zero.sum())
        for u in np.flatnonzero(~missing & ~zero):
            g_prev = growth_rate(prev[u], cur[u])
            g_next = growth_rate(cur[u], nxt[u])
            out.triples.append(GrowthTriple(users[u], i, g_prev, g_next, g_next - g_prev))
    return out


def _mean_sd(sample: np.ndarray) -> tuple[float, float]:
    n = sample.size
    mean = math.fsum(sample) / n
    var = math.fsum((sample - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var)


def one_sided_t_test(
    sample: Sequence[float],
    hypothesis: str,
    alpha: float = 0.01,
    triple: tuple[int, int, int] = (0, 0, 0),
    metric: str = "",
) -> TTestResult:
    """One-sample t-test of the mean against zero.

    ``H0_minus`` (mean <= 0) takes the upper tail, ``H0_plus`` (mean >= 0)
    the lower tail.  A zero-variance sample is flagged as degenerate: its
    p-value is 0 or 1 according to the sign of the mean, 0.5 when the mean is
    exactly zero.
    """
    if hypothesis not in HYPOTHESES:
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    x = np.asarray(sample, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("t-test needs at least two observations")
    mean, sd = _mean_sd(x)
    degenerate = sd == 0.0
    if degenerate:
        t_stat = 0.0 if mean == 0 else math.copysign(math.inf, mean)
        if mean == 0:
            p = 0.5
        elif hypothesis == H0_MINUS:
            p = 0.0 if mean > 0 else 1.0
        else:
            p = 0.0 if mean < 0 else 1.0
    else:
        t_stat = mean / (sd / math.sqrt(n))
        p = t_cdf(-t_stat, n - 1) if hypothesis == H0_MINUS else t_cdf(t_stat, n - 1)
    outcome = REJECTED if p < alpha else ACCEPTED
    return TTestResult(tuple(triple), hypothesis, n, mean, t_stat, p, alpha, outcome, degenerate, metric)


def confidence_interval(sample: Sequence[float], level: float = 0.99, period: int = 0) -> IntervalEstimate:
    """Two-sided t interval for the mean."""
    x = np.asarray(sample, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("confidence interval needs at least two observations")
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    mean, sd = _mean_sd(x)
    half = t_ppf((1 + level) / 2, n - 1) * sd / math.sqrt(n)
    return IntervalEstimate(period, mean, mean - half, mean + half, level, n)


def metric_alpha(metric: str, alphas: Mapping[str, float] | float | None = None) -> float:
    if isinstance(alphas, (int, float)):
        return float(alphas)
    table = dict(DEFAULT_ALPHAS)
    if alphas:
        table.update(alphas)
    if metric in table:
        return table[metric]
    return table[METRIC_FAMILY.get(metric, "structure")]


@dataclass
class LockdownReport:
    rows: list[TTestResult]
    exclusions: dict[str, dict[str, dict[int, int]]]

    def table(self) -> pd.DataFrame:
        """Wide layout: one row per (metric, triple) with outcome and p-value per hypothesis."""
        recs = {}
        for r in self.rows:
            key = (r.metric, r.triple)
            rec = recs.setdefault(
                key,
                {"metric": r.metric, "periods": "(" + ",".join(f"I_{k}" for k in r.triple) + ")", "n": r.n, "alpha": r.alpha},
            )
            tag = "h0_minus" if r.hypothesis == H0_MINUS else "h0_plus"
            rec[f"{tag}_outcome"] = r.outcome
            rec[f"{tag}_p"] = r.p_value
        return pd.DataFrame(list(recs.values()))

    def rejections(self) -> list[TTestResult]:
        return [r for r in self.rows if r.outcome == REJECTED]


def lockdown_report(
    series: Mapping[str, MetricSeries] | Sequence[MetricSeries],
    alphas: Mapping[str, float] | float | None = None,
    correction: str = "none",
) -> LockdownReport:
    """t-tests of both one-sided hypotheses for every consecutive period triple.

    ``alphas`` maps metric names or families (structure / polarity / topics)
    to significance levels.  ``correction="bonferroni"`` divides each metric's
    alpha by its number of tests; off by default.
    """
    if correction not in ("none", "bonferroni"):
        raise ValueError(f"unknown correction {correction!r}")
    if isinstance(series, Mapping):
        series = list(series.values())
    rows, exclusions = [], {}
    for s in series:
        diffs = growth_second_difference(s)
        exclusions[s.name] = {"zero_base": diffs.excluded_zero_base, "missing": diffs.excluded_missing}
        alpha = metric_alpha(s.name, alphas)
        n_tests = 2 * (s.n_periods - 2)
        if correction == "bonferroni":
            alpha = alpha / n_tests
        for i in range(1, s.n_periods - 1):
            sample = diffs.sample(i)
            triple = (i - 1, i, i + 1)
            for h in HYPOTHESES:
                if sample.size < 2:
                    rows.append(TTestResult(triple, h, int(sample.size), math.nan, math.nan, math.nan, alpha, ACCEPTED, True, s.name))
                else:
                    rows.append(one_sided_t_test(sample, h, alpha, triple, s.name))
    return LockdownReport(rows, exclusions)


def period_intervals(series: MetricSeries, level: float) -> list[IntervalEstimate]:
    """Mean and t interval of the metric in each period (users with a value)."""
    out = []
    for k in range(series.n_periods):
        col = series.values.iloc[:, k].dropna().to_numpy()
        if col.size >= 2:
            out.append(confidence_interval(col, level, k))
        else:
            m = float(col.mean()) if col.size else math.nan
            out.append(IntervalEstimate(k, m, math.nan, math.nan, level, int(col.size)))
    return out


def difference_intervals(series: MetricSeries, level: float) -> list[IntervalEstimate]:
    """Mean and t interval of the growth-rate second difference, keyed by the middle period."""
    diffs = growth_second_difference(series)
    out = []
    for i in range(1, series.n_periods - 1):
        sample = diffs.sample(i)
        if sample.size >= 2:
            out.append(confidence_interval(sample, level, i))
        else:
            out.append(IntervalEstimate(i, math.nan, math.nan, math.nan, level, int(sample.size)))
    return out
