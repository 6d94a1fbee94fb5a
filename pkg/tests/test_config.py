"""Configuration parsing, validation, and round-trip stability."""
import math

import pytest

from fresco.config import (
    SCALES,
    ConfigError,
    RadioParams,
    ScenarioConfig,
    dump_config,
    load_config,
    parse_flat_file,
)


def test_defaults_validate():
    ScenarioConfig().validate()


@pytest.mark.parametrize("scale,expected", sorted(SCALES.items()))
def test_scales(scale, expected):
    cfg = ScenarioConfig().with_scale(scale)
    assert (cfg.num_mus, cfg.num_uavs) == expected


def test_unknown_scale_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig().with_scale("S9")


def test_candidate_split_covers_all_uavs():
    for scale in SCALES:
        cfg = ScenarioConfig().with_scale(scale)
        assert cfg.num_candidates + cfg.num_serving == cfg.num_uavs
        assert cfg.num_candidates == math.ceil(cfg.candidate_fraction * cfg.num_uavs)
        assert cfg.num_serving > 0


def test_threshold_ordering_enforced():
    cfg = ScenarioConfig(xi_th=0.2, xi_alarm=0.1)
    with pytest.raises(ConfigError):
        cfg.validate()
    cfg = ScenarioConfig(xi_th=0.0)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_s_min_bounds():
    with pytest.raises(ConfigError):
        ScenarioConfig(s_min=1.5).validate()
    ScenarioConfig(s_min=0.0).validate()
    ScenarioConfig(s_min=1.0).validate()


def test_window_horizon_positive():
    with pytest.raises(ConfigError):
        ScenarioConfig(horizon=0).validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(window=0).validate()


def test_epsilon_positive():
    with pytest.raises(ConfigError):
        ScenarioConfig(epsilon=0.0).validate()


def test_weights_nonnegative():
    with pytest.raises(ConfigError):
        ScenarioConfig(beta=(1.0, -0.1, 1.0, 1.0)).validate()
    with pytest.raises(ConfigError):
        ScenarioConfig(nu=(1.0, 0.0, 1.0)).validate()


def test_radio_validation():
    with pytest.raises(ConfigError):
        RadioParams(noise_power=0.0).validate()
    with pytest.raises(ConfigError):
        RadioParams(pathloss_exponent=1.5).validate()


def test_flat_file_round_trip(tmp_path):
    cfg = ScenarioConfig(xi_th=0.05, slots=40, beta=(2.0, 1.0, 1.0, 0.25))
    cfg.radio.snr_min = 2.0
    path = tmp_path / "cfg.txt"
    path.write_text(dump_config(cfg))
    loaded = load_config(path)
    assert loaded == cfg


def test_flat_file_comments_and_tuples(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text(
        "# comment line\n"
        "scenario.slots = 16   # trailing comment\n"
        "scenario.beta = 1.0, 0.5, 0.5, 0.25\n"
        "radio.b_link = 12.5\n"
    )
    cfg = load_config(path)
    assert cfg.slots == 16
    assert cfg.beta == (1.0, 0.5, 0.5, 0.25)
    assert cfg.radio.b_link == 12.5


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("scenario.not_a_field = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_malformed_line_rejected(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("scenario.slots 16\n")
    with pytest.raises(ConfigError):
        parse_flat_file(path)


def test_overrides_apply_and_validate():
    cfg = load_config(overrides={"scenario.slots": 8, "radio.snr_min": 3.0})
    assert cfg.slots == 8
    assert cfg.radio.snr_min == 3.0
    with pytest.raises(ConfigError):
        load_config(overrides={"scenario.xi_th": 0.5})  # >= xi_alarm


def test_dump_is_canonical():
    cfg = ScenarioConfig()
    assert dump_config(cfg) == dump_config(ScenarioConfig())
    lines = dump_config(cfg).strip().splitlines()
    assert lines == sorted(lines)
