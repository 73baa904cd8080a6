"""Signed ego networks: per-tie polarity tallies, binary signs, per-ego percentages."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from .core import PolarityLabel
from .egonet import EgoNetworkSnapshot

NEGATIVITY_THRESHOLD = 0.17


@dataclass(frozen=True)
class SignedTie:
    ego_id: str
    alter_id: str
    period: int
    n_positive: int
    n_negative: int
    n_neutral: int
    negative_fraction: float
    sign: str  # "positive" | "negative"


@dataclass(frozen=True)
class PolaritySummary:
    ego_id: str
    period: int
    pct_negative: float
    pct_positive: float


def negative_fraction(n_pos: int, n_neg: int, n_neu: int, neutral_in_denominator: bool = True) -> float:
    total = n_pos + n_neg + (n_neu if neutral_in_denominator else 0)
    return n_neg / total if total else 0.0


def classify_tie(
    labels: Iterable,
    threshold: float = NEGATIVITY_THRESHOLD,
    neutral_in_denominator: bool = True,
) -> dict:
    """Tally polarity labels of one tie and derive its sign.

    A tie is negative when strictly more than ``threshold`` of its
    interactions are negative; otherwise it is positive.
    """
    labels = [PolarityLabel(l) for l in labels]
    if not labels:
        raise ValueError("tie has no labelled interactions")
    n_pos = sum(l is PolarityLabel.POSITIVE for l in labels)
    n_neg = sum(l is PolarityLabel.NEGATIVE for l in labels)
    n_neu = len(labels) - n_pos - n_neg
    frac = negative_fraction(n_pos, n_neg, n_neu, neutral_in_denominator)
    return {
        "n_positive": n_pos,
        "n_negative": n_neg,
        "n_neutral": n_neu,
        "negative_fraction": frac,
        "sign": "negative" if frac > threshold else "positive",
    }


def signed_ties(
    ego: str,
    period: int,
    frame: pd.DataFrame,
    alters: Iterable[str],
    threshold: float = NEGATIVITY_THRESHOLD,
    neutral_in_denominator: bool = True,
) -> tuple[list[SignedTie], list[str]]:
    """Signed ties of ``ego`` towards ``alters``; also returns alters lacking any polarity label.

    ``frame`` must carry a ``period`` column.
    """
    sub = frame[(frame["ego_id"] == ego) & (frame["period"] == period)]
    out, unlabeled = [], []
    for alter in sorted(alters):
        labels = [p for p in sub.loc[sub["alter_id"] == alter, "polarity"] if isinstance(p, str)]
        if not labels:
            unlabeled.append(alter)
            continue
        out.append(SignedTie(ego, alter, period, **classify_tie(labels, threshold, neutral_in_denominator)))
    return out, unlabeled


def polarity_percentages(
    ego: str,
    period: int,
    snapshot: EgoNetworkSnapshot,
    ties: Sequence[SignedTie],
) -> PolaritySummary:
    """Percentages of negative and positive ties over the active network."""
    if snapshot.active_size == 0:
        raise ValueError(f"ego {ego} has an empty active network in period {period}")
    tie_alters = {t.alter_id for t in ties}
    if tie_alters != set(snapshot.alters):
        raise ValueError("signed ties must cover exactly the snapshot's active alters")
    n_neg = sum(t.sign == "negative" for t in ties)
    pct_neg = 100.0 * n_neg / snapshot.active_size
    return PolaritySummary(ego, period, pct_neg, 100.0 - pct_neg)


def signed_tie_table(
    frame: pd.DataFrame,
    active: pd.DataFrame,
    threshold: float = NEGATIVITY_THRESHOLD,
    neutral_in_denominator: bool = True,
) -> pd.DataFrame:
    """Tallies and signs for every active (ego, period, alter) triple.

    ``active`` lists the active ties (columns ``ego_id``, ``period``,
    ``alter_id``).  Ties without any polarity label get ``sign = NaN``.
    """
    labelled = frame[frame["polarity"].notna()]
    tallies = (
        labelled.groupby(["ego_id", "period", "alter_id", "polarity"], observed=True)
        .size()
        .unstack("polarity", fill_value=0)
    )
    for lab in ("positive", "negative", "neutral"):
        if lab not in tallies.columns:
            tallies[lab] = 0
    tallies = tallies[["positive", "negative", "neutral"]].reset_index()
    tallies["ego_id"] = tallies["ego_id"].astype(str)
    tallies["alter_id"] = tallies["alter_id"].astype(str)
    keys = active[["ego_id", "period", "alter_id"]].astype({"ego_id": str, "alter_id": str})
    table = keys.merge(tallies, on=["ego_id", "period", "alter_id"], how="left")
    for lab in ("positive", "negative", "neutral"):
        table[lab] = table[lab].fillna(0).astype(int)
    table = table.rename(columns={"positive": "n_positive", "negative": "n_negative", "neutral": "n_neutral"})
    denom = table["n_positive"] + table["n_negative"]
    if neutral_in_denominator:
        denom = denom + table["n_neutral"]
    labelled_total = table["n_positive"] + table["n_negative"] + table["n_neutral"]
    frac = np.where(denom.to_numpy() > 0, table["n_negative"] / denom.where(denom > 0, 1), 0.0)
    table["negative_fraction"] = frac
    sign = np.where(frac > threshold, "negative", "positive").astype(object)
    sign[labelled_total.to_numpy() == 0] = None
    table["sign"] = sign
    return table.sort_values(["ego_id", "period", "alter_id"]).reset_index(drop=True)


def polarity_table(signed: pd.DataFrame) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Per-(ego, period) percentages plus a table of ties excluded for lacking labels."""
    excluded = signed[signed["sign"].isna()]
    ok = signed[signed["sign"].notna()]
    g = ok.assign(neg=(ok["sign"] == "negative").astype(int)).groupby(["ego_id", "period"])
    out = pd.DataFrame({"n_ties": g.size(), "n_negative": g["neg"].sum()}).reset_index()
    out["pct_negative"] = 100.0 * out["n_negative"] / out["n_ties"]
    out["pct_positive"] = 100.0 - out["pct_negative"]
    out = out.rename(columns={"ego_id": "ego"})
    return out[["ego", "period", "n_ties", "pct_negative", "pct_positive"]], excluded
