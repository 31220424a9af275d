"""Scene configs: generation determinism, serialization round-trips."""

import pytest

from platesynth.camera import camera_bank, light_bank
from platesynth.errors import ConfigError
from platesynth.scene import (
    FORMAT_HEADER,
    SceneConfig,
    generate_config,
    parse_config,
    read_config,
    serialize_config,
    write_config,
)


def test_generation_is_deterministic():
    assert generate_config(1234) == generate_config(1234)
    assert generate_config(1234) != generate_config(1235)


def test_generated_presets_come_from_banks():
    config = generate_config(77)
    assert config.camera == camera_bank()[config.camera_id]
    assert config.light == light_bank()[config.light_id]


def test_all_bank_entries_reachable():
    cameras = set()
    lights = set()
    for seed in range(300):
        config = generate_config(seed)
        cameras.add(config.camera_id)
        lights.add(config.light_id)
    assert cameras == set(camera_bank())
    assert lights == set(light_bank())


def test_serialize_parse_round_trip():
    config = generate_config(42, resolution=(640, 360), scene_length=12, depth_range=(1.5, 9.0))
    assert parse_config(serialize_config(config)) == config


def test_serialization_is_byte_stable():
    config = generate_config(42)
    assert serialize_config(config) == serialize_config(config)
    assert serialize_config(config).startswith(FORMAT_HEADER + "\n")


def test_write_read_round_trip(tmp_path):
    config = generate_config(7, scene_length=3)
    path = tmp_path / "config.txt"
    write_config(config, path)
    assert read_config(path) == config
    first = path.read_bytes()
    write_config(config, path)
    assert path.read_bytes() == first


def test_parse_rejects_wrong_header():
    config = generate_config(1)
    text = serialize_config(config).replace(FORMAT_HEADER, "other-format 9", 1)
    with pytest.raises(ConfigError):
        parse_config(text)


def test_parse_rejects_bad_json():
    with pytest.raises(ConfigError):
        parse_config(FORMAT_HEADER + "\n{not json")


def test_parse_rejects_missing_field():
    config = generate_config(1)
    text = serialize_config(config).replace('"trajectory_seed"', '"renamed_seed"')
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_validation():
    base = generate_config(3)
    with pytest.raises(ConfigError):
        SceneConfig(
            plate=base.plate,
            camera=base.camera,
            light=base.light,
            trajectory_seed=base.trajectory_seed,
            resolution=base.resolution,
            scene_length=0,
            depth_range=base.depth_range,
        )
    with pytest.raises(ConfigError):
        SceneConfig(
            plate=base.plate,
            camera=base.camera,
            light=base.light,
            trajectory_seed=base.trajectory_seed,
            resolution=base.resolution,
            scene_length=5,
            depth_range=(8.0, 2.0),
        )


def test_empty_bank_rejected():
    with pytest.raises(ConfigError):
        generate_config(1, cameras={}, lights=None)
