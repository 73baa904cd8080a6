import pytest

from egoshift.config import PipelineConfig
from egoshift.errors import ConfigError


def test_defaults():
    cfg = PipelineConfig.from_dict({})
    assert cfg.thresholds.active_frequency == 1.0
    assert cfg.thresholds.negative_fraction == 0.17
    assert cfg.thresholds.regular_month_share == 0.5
    assert cfg.thresholds.activity_slack_months == 6.0
    assert cfg.thresholds.iqr_multiplier == 1.5
    assert (cfg.alphas.structure, cfg.alphas.polarity, cfg.alphas.topics) == (0.01, 0.01, 0.05)
    assert cfg.toggles.quotes_in_frequency is False
    assert cfg.toggles.neutral_in_denominator is True
    assert len(cfg.period_schedule) == 7


def test_yaml_round_trip(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("thresholds:\n  negative_fraction: 0.2\nalphas:\n  topics: 0.1\nseed: 4\n")
    cfg = PipelineConfig.load(p)
    assert cfg.thresholds.negative_fraction == 0.2 and cfg.alphas.topics == 0.1 and cfg.seed == 4
    assert cfg.config_hash() != PipelineConfig.from_dict({}).config_hash()
    assert PipelineConfig.from_dict(cfg.to_dict()).config_hash() == cfg.config_hash()


@pytest.mark.parametrize(
    "data",
    [
        {"thresholds": {"negative_fraction": 1.5}},
        {"thresholds": {"active_frequency": 0}},
        {"alphas": {"structure": 0}},
        {"toggles": {"quotes_in_frequency": "yes"}},
        {"stats": {"correction": "holm"}},
        {"schedule": {"stride_years": 0.3}},
        {"schedule": {"count": 2}},
        {"nonsense": 1},
        {"thresholds": {"bogus": 1}},
        {"synth": {"n_users": 0}},
    ],
)
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(data)


def test_unreadable_and_malformed(tmp_path):
    with pytest.raises(ConfigError):
        PipelineConfig.load(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        PipelineConfig.load(bad)
