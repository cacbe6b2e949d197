import json
from pathlib import Path

import pytest

from src.errors import ConfigError
from src.scenario_config import (DEFAULTS, ScenarioConfig, apply_overrides, load_config, merge_defaults,
                                 parse_crash, validate_config)
from src.tasks import MOVING_3PT, STATIC_1PT

SAMPLE = Path(__file__).resolve().parent.parent / "input_scenario_format.json"


def test_defaults_build_the_default_scenario():
    cfg = ScenarioConfig.from_dict(load_config(None))
    assert cfg == ScenarioConfig()
    assert cfg.object_count == 20
    assert dict(cfg.inventory)[MOVING_3PT] == 10
    assert cfg.cost.t_pick_moving == 45.0
    assert cfg.quantizer.step == 1.0


def test_sample_file_is_a_complete_valid_scenario():
    config = load_config(str(SAMPLE))
    assert set(json.loads(SAMPLE.read_text())) == set(DEFAULTS)
    assert ScenarioConfig.from_dict(config) == ScenarioConfig()


def test_to_dict_round_trip():
    cfg = ScenarioConfig(seed=12, t0=450.0, uav_count=2, strategy="Random", crashes=((1, 30.0),))
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg


def test_partial_file_is_merged_over_defaults(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"uav_count": 2, "static_1pt": 0, "moving_3pt": 1}))
    cfg = ScenarioConfig.from_dict(load_config(str(path)))
    assert cfg.uav_count == 2
    assert cfg.object_count == 7
    assert dict(cfg.inventory)[STATIC_1PT] == 0


@pytest.mark.parametrize("overrides", [
    {"colour": "red"},
    {"strategy": "Greedy"},
    {"t0": -1.0},
    {"uav_count": 0},
    {"uav_count": 1.5},
    {"horizon": 0},
    {"p_out": 1.5},
    {"uav_speed": 0.0},
    {"static_2pt": -1},
    {"seed": "zero"},
    {"width_m": 105.0},
    {"drop_box_x": 150.0},
    {"object_positions": [[1.0, 1.0]]},
    {"crashes": [[5, 10.0]]},
    {"crashes": [[0, -3.0]]},
    {"crashes": ["0@10"]},
])
def test_invalid_values_are_rejected(overrides):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(merge_defaults(overrides))


def test_object_positions_must_lie_in_the_arena():
    config = merge_defaults({"static_1pt": 1, "static_2pt": 0, "static_3pt": 0, "moving_3pt": 0,
                             "object_positions": [[120.0, 10.0]]})
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(config)
    config["object_positions"] = [[20.0, 10.0]]
    assert ScenarioConfig.from_dict(config).object_positions == ((20.0, 10.0),)


def test_missing_key_is_reported():
    config = merge_defaults({})
    del config["t0"]
    with pytest.raises(ConfigError, match="t0"):
        validate_config(config)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "absent.json"))


def test_malformed_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"t0\": ")
    with pytest.raises(ConfigError):
        load_config(str(path))
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_overrides_skip_flags_not_given():
    config = apply_overrides(merge_defaults({}), {"seed": 9, "t0": None, "strategy": "Random"})
    assert config["seed"] == 9
    assert config["t0"] == 1200.0
    assert config["strategy"] == "Random"


@pytest.mark.parametrize("text, expected", [("1@300", [1, 300.0]), ("0@12.5", [0, 12.5])])
def test_parse_crash(text, expected):
    assert parse_crash(text) == expected


@pytest.mark.parametrize("text", ["1", "a@3", "1@b", "1@2@3"])
def test_parse_crash_rejects_bad_input(text):
    with pytest.raises(ConfigError):
        parse_crash(text)
