import json

import pytest

from uavisac.config import (
    ExperimentConfig,
    config_hash,
    load_config,
    parse_config,
    preset_text,
)
from uavisac.exceptions import ConfigError


def preset_dict():
    return json.loads(preset_text("paper_fig4"))


def write(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


def test_preset_radar_values():
    cfg = load_config("paper_fig4")
    assert cfg.radar.carrier_frequency == 60e9
    assert cfg.radar.bandwidth == 1.76e9
    assert cfg.radar.pri == 2e-6
    assert cfg.radar.cpi == 4e-3
    assert cfg.scene.uca.radius == 1.07 and cfg.scene.uca.n_elements == 8
    assert [t.range for t in cfg.scene.targets] == [5.0, 10.0, 15.0]
    assert [t.radial_speed for t in cfg.scene.targets] == [4.0, 18.0, 10.0]
    assert [t.rcs.vv for t in cfg.scene.targets] == [10.0, 5.0, 1.0]
    assert [t.rcs.hh for t in cfg.scene.targets] == [2.0, 1.0, 0.2]
    assert all(90 <= t.elevation <= 180 for t in cfg.scene.targets)
    assert cfg.scene.clutter.coefficient_db == -5.0
    assert any("elevation" in n for n in cfg.notes)


def test_empty_file(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, ""))
    assert err.value.key is None


def test_malformed_json(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "{not json"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_unknown_preset_name_is_a_path(tmp_path):
    with pytest.raises(ConfigError):
        load_config("paper_fig5")
    with pytest.raises(ConfigError):
        preset_text("paper_fig5")


@pytest.mark.parametrize("mutate,key", [
    (lambda d: d["scene"]["uca"].__setitem__("radius", -1.0), "scene.uca.radius"),
    (lambda d: d["radar"].__setitem__("pri", 0), "radar.pri"),
    (lambda d: d["scene"]["targets"][1].__setitem__("range", -5), "scene.targets[1].range"),
    (lambda d: d["scene"]["targets"][0].pop("azimuth"), "scene.targets[0].azimuth"),
    (lambda d: d["scene"]["uca"].__setitem__("colour", "red"), "scene.uca.colour"),
    (lambda d: d.__setitem__("scale_profile", "huge"), "scale_profile"),
    (lambda d: d["processing"].__setitem__("max_targets", 2.5), "processing.max_targets"),
    (lambda d: d["scene"]["ground"].__setitem__("fixed_gamma_h", [2, 0]),
     "scene.ground.fixed_gamma_h"),
    (lambda d: d["scene"]["uca"].__setitem__("center", [0, 0, -1]), "scene.uca.center"),
    (lambda d: d["scene"]["clutter"].__setitem__("patch", [1, 0, 0, 1]), "scene.clutter.patch"),
    (lambda d: d["noise"].__setitem__("snr_reference_target", 7), "noise.snr_reference_target"),
    (lambda d: d["scene"]["clutter"].__setitem__("enabled", "yes"), "scene.clutter.enabled"),
    (lambda d: d["radar"].__setitem__("cpi", 2e-6), "radar.cpi"),
])
def test_validation_names_key(tmp_path, mutate, key):
    data = preset_dict()
    mutate(data)
    with pytest.raises(ConfigError) as err:
        load_config(write(tmp_path, data))
    assert err.value.key == key
    assert key in str(err.value)


def test_defaults_applied(tmp_path):
    cfg = load_config(write(tmp_path, {"scene": {"targets": [
        {"range": 3.0, "azimuth": 0.0, "elevation": 120.0}]}}))
    assert cfg.radar.carrier_frequency == 60e9
    assert cfg.processing.max_targets == 3
    assert cfg.scene.targets[0].rcs.vv == 1.0
    assert cfg.scene.ground.relative_permittivity == 5 - 0.5j


def test_round_trip_is_lossless():
    cfg = load_config("paper_fig4")
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert again.to_dict() == cfg.to_dict()


def test_hash_is_stable_and_sensitive():
    a, b = load_config("paper_fig4"), load_config("paper_fig4")
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    b.seed += 1
    assert config_hash(a) != config_hash(b)


def test_complex_values_accept_plain_numbers(tmp_path):
    cfg = load_config(write(tmp_path, {"scene": {"ground": {"relative_permittivity": 3}}}))
    assert cfg.scene.ground.relative_permittivity == 3 + 0j


def test_from_dict_rejects_non_object():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict([1, 2])
