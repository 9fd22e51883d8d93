import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swarmctl import config, presets
from swarmctl.config import ConfigError

ROOT = Path(__file__).resolve().parent.parent


@pytest.mark.parametrize("make", [presets.flocking_controller, presets.cohesion_controller,
                                  presets.pattern_controller, presets.collision_structure,
                                  presets.search_structure])
def test_controller_round_trip(make, tmp_path):
    spec = make()
    config.save_controller(spec, tmp_path / "c.json")
    assert config.load_controller(tmp_path / "c.json") == spec


@pytest.mark.parametrize("make", [presets.flocking_scenario, presets.cohesion_scenario,
                                  presets.pattern_scenario, presets.collision_scenario,
                                  presets.search_scenario])
def test_scenario_round_trip(make, tmp_path):
    sc = make()
    config.save_scenario(sc, tmp_path / "s.json")
    assert config.load_scenario(tmp_path / "s.json") == sc


def test_shipped_files_load():
    for p in sorted((ROOT / "presets").glob("*.json")):
        config.load_controller(p)
    for p in sorted((ROOT / "scenarios").glob("*.json")):
        config.load_scenario(p)
    assert config.load_controller(ROOT / "presets" / "flocking.json") == presets.flocking_controller()


def test_optimizer_output_is_labelled():
    for name in ("collision_avoidance", "search"):
        assert "optimizer output" in config.load_controller(ROOT / "presets" / f"{name}.json").note


def write(tmp_path, data):
    p = tmp_path / "x.json"
    p.write_text(json.dumps(data))
    return p


def test_missing_file_names_path(tmp_path):
    with pytest.raises(ConfigError) as e:
        config.load_scenario(tmp_path / "missing.json")
    assert "missing.json" in str(e.value)


def test_unknown_scenario_key(tmp_path):
    d = config.scenario_to_dict(presets.collision_scenario())
    d["warp_drive"] = True
    with pytest.raises(ConfigError) as e:
        config.load_scenario(write(tmp_path, d))
    assert e.value.key == "warp_drive"


def test_bad_scenario_value_names_key(tmp_path):
    d = config.scenario_to_dict(presets.collision_scenario())
    d["n_agents"] = 1
    with pytest.raises(ConfigError) as e:
        config.load_scenario(write(tmp_path, d))
    assert e.value.key == "n_agents"


def test_schema_version_checked(tmp_path):
    d = config.controller_to_dict(presets.flocking_controller())
    d["schema_version"] = 99
    with pytest.raises(ConfigError) as e:
        config.load_controller(write(tmp_path, d))
    assert e.value.key == "schema_version"


def test_controller_shape_mismatch(tmp_path):
    d = config.controller_to_dict(presets.flocking_controller())
    d["params"] = d["params"][:-1]
    with pytest.raises(ConfigError) as e:
        config.load_controller(write(tmp_path, d))
    assert e.value.key == "params"


def test_invalid_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        config.load_controller(p)


@settings(max_examples=50)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=12, max_size=12))
def test_floats_survive_serialization_exactly(values):
    spec = presets.collision_structure(params=np.reshape(values, (4, 3)))
    back = config.controller_from_dict(json.loads(config.dumps(config.controller_to_dict(spec))))
    assert np.array_equal(back.params, spec.params)
