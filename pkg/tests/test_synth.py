import numpy as np
import pandas as pd
import pytest

from egoshift.config import PipelineConfig
from egoshift.core import PeriodSchedule
from egoshift.errors import ConfigError
from egoshift.ingest import with_periods
from egoshift.pipeline import active_tie_table, compute_frequencies, compute_polarity
from egoshift.semantic import topic_table
from egoshift.synth import (
    ShockConfig,
    expected_pct_negative,
    expected_unique_topics,
    generate_cohort,
    lockdown_scenario,
    planted_profile,
    profile_gap_ratio,
)


def test_deterministic_and_seed_sensitive():
    cfg = ShockConfig(n_users=5, seed=3)
    a, _ = generate_cohort(cfg)
    b, _ = generate_cohort(ShockConfig(n_users=5, seed=3))
    pd.testing.assert_frame_equal(a, b)
    c, _ = generate_cohort(ShockConfig(n_users=5, seed=4))
    assert not a.equals(c)


def test_ego_substreams_independent_of_cohort_size():
    small, _ = generate_cohort(ShockConfig(n_users=3, seed=1))
    big, _ = generate_cohort(ShockConfig(n_users=6, seed=1))
    cols = ["ego_id", "alter_id", "timestamp", "kind", "polarity", "topic"]
    sub = big[big["ego_id"].isin(small["ego_id"].unique())][cols].reset_index(drop=True)
    pd.testing.assert_frame_equal(sub, small[cols].reset_index(drop=True))


def test_records_respect_invariants():
    frame, truth = generate_cohort(ShockConfig(n_users=4, seed=0))
    sch = PeriodSchedule()
    assert (frame["ego_id"] != frame["alter_id"]).all()
    assert (sch.assign(frame["timestamp"]) >= 0).all()
    assert (frame.loc[frame["kind"] == "retweet", "polarity"] == "neutral").all()
    for ego, layers in truth.alter_layer.items():
        assert set(frame.loc[frame["ego_id"] == ego, "alter_id"]) <= set(layers)


def test_invalid_configs():
    with pytest.raises(ConfigError):
        ShockConfig(layer_rates=(1.0, 2.0, 3.0, 4.0)).validate()
    with pytest.raises(ConfigError):
        ShockConfig(size_multipliers=(1.0,) * 6 + (0.0,)).validate()
    with pytest.raises(ConfigError):
        ShockConfig(layer_sizes=(100, 100, 100, 100)).validate()
    with pytest.raises(ConfigError):
        ShockConfig().validate(n_periods=5)


def test_planted_profile_gap():
    assert profile_gap_ratio((80, 20, 5, 1.25), 0.05) >= 5
    vals, labels = planted_profile(np.random.default_rng(0))
    assert len(vals) == 150 and labels.max() == 3


def test_pct_negative_matches_binomial_model():
    scen = lockdown_scenario(n_users=300, seed=11)
    frame, _ = generate_cohort(scen)
    cfg = PipelineConfig()
    fp = with_periods(frame, cfg.period_schedule)
    freq = compute_frequencies(fp, cfg)
    _, pct, _ = compute_polarity(fp, active_tie_table(freq, cfg), cfg)
    observed = pct.groupby("period")["pct_negative"].mean()
    for k in range(7):
        assert observed[k] == pytest.approx(expected_pct_negative(scen, k), abs=2.0)
    assert observed.idxmax() == 5


def test_unique_topics_follow_coupon_collector():
    scen = ShockConfig(n_users=100, seed=2, topic_multipliers=(1, 1, 1, 1, 1, 2, 1))
    frame, truth = generate_cohort(scen)
    fp = with_periods(frame, PeriodSchedule())
    table = topic_table(fp)
    # condition on each ego's labelled tweet count
    labelled = fp[(fp["kind"] != "retweet") & (fp["topic"] >= 0)].groupby(["ego_id", "period"]).size()
    expected = [expected_unique_topics(int(m), truth.topic_pools[k]) for (e, k), m in labelled.items()]
    got = table.set_index(["ego", "period"]).loc[labelled.index, "unique_count"].to_numpy()
    assert np.mean(got) == pytest.approx(np.mean(expected), rel=0.01)
