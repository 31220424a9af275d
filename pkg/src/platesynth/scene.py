"""Per-sequence scene configuration: generation, serialization, parsing.

A scene configuration pins everything the renderer needs: the plate string,
one camera preset, one light preset, the trajectory seed, the output
resolution, and the scene length.  Configs are immutable values.

File format (versioned, one document per sequence)::

    platesynth-config 1
    { ...canonical JSON, sorted keys, 2-space indent... }

The camera and light presets are embedded as full snapshots, not bank
references, so an archived config replays without the preset bank that
produced it.  Serialization is byte-deterministic: equal configs always
produce equal documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .camera import CameraPreset, LightPreset, camera_bank, light_bank
from .errors import ConfigError
from .plates import PlateString, generate_plate
from .prng import SplitMix64

FORMAT_HEADER = "platesynth-config 1"

DEFAULT_RESOLUTION = (1920, 1080)
DEFAULT_SCENE_LENGTH = 50
DEFAULT_DEPTH_RANGE = (2.0, 8.0)


@dataclass(frozen=True)
class SceneConfig:
    """Everything needed to re-render one sequence deterministically."""

    plate: PlateString
    camera: CameraPreset
    light: LightPreset
    trajectory_seed: int
    resolution: tuple[int, int]
    scene_length: int
    depth_range: tuple[float, float] = DEFAULT_DEPTH_RANGE

    def __post_init__(self) -> None:
        if min(self.resolution) <= 0:
            raise ConfigError(f"resolution must be positive, got {self.resolution}")
        if self.scene_length < 1:
            raise ConfigError(f"scene_length must be >= 1, got {self.scene_length}")
        if not (0 <= self.trajectory_seed < 2**64):
            raise ConfigError("trajectory_seed must fit in 64 bits")
        lo, hi = self.depth_range
        if not (0 < lo < hi):
            raise ConfigError(f"depth_range must satisfy 0 < near < far, got {self.depth_range}")

    @property
    def camera_id(self) -> str:
        return self.camera.preset_id

    @property
    def light_id(self) -> str:
        return self.light.preset_id


def _choices(bank) -> list:
    """Bank presets in deterministic id order; accepts mapping or sequence."""
    if isinstance(bank, Mapping):
        presets = list(bank.values())
    else:
        presets = list(bank)
    if not presets:
        raise ConfigError("preset bank is empty")
    ids = [p.preset_id for p in presets]
    if len(set(ids)) != len(ids):
        raise ConfigError("preset bank contains duplicate ids")
    return sorted(presets, key=lambda p: p.preset_id)


def generate_config(
    master_seed: int,
    cameras: Mapping[str, CameraPreset] | Sequence[CameraPreset] | None = None,
    lights: Mapping[str, LightPreset] | Sequence[LightPreset] | None = None,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    scene_length: int = DEFAULT_SCENE_LENGTH,
    depth_range: tuple[float, float] = DEFAULT_DEPTH_RANGE,
) -> SceneConfig:
    """Derive a complete scene configuration from one 64-bit seed.

    Draw order (pinned by tests): plate, camera index, light index,
    trajectory seed.  Bank entries are consumed in sorted id order so the
    choice does not depend on bank container ordering.
    """
    camera_choices = _choices(camera_bank() if cameras is None else cameras)
    light_choices = _choices(light_bank() if lights is None else lights)
    rng = SplitMix64(master_seed)
    plate = generate_plate(rng)
    camera = camera_choices[rng.next_below(len(camera_choices))]
    light = light_choices[rng.next_below(len(light_choices))]
    trajectory_seed = rng.next_u64()
    return SceneConfig(
        plate=plate,
        camera=camera,
        light=light,
        trajectory_seed=trajectory_seed,
        resolution=tuple(resolution),
        scene_length=scene_length,
        depth_range=tuple(depth_range),
    )


def _camera_to_dict(camera: CameraPreset) -> dict:
    return {
        "preset_id": camera.preset_id,
        "position": list(camera.position),
        "tilt": list(camera.tilt),
        "sensor_size_mm": list(camera.sensor_size_mm),
        "focal_length_mm": camera.focal_length_mm,
        "f_number": camera.f_number,
        "native_resolution": list(camera.native_resolution),
    }


def _camera_from_dict(data: dict) -> CameraPreset:
    return CameraPreset(
        preset_id=data["preset_id"],
        position=tuple(data["position"]),
        tilt=tuple(data["tilt"]),
        sensor_size_mm=tuple(data["sensor_size_mm"]),
        focal_length_mm=data["focal_length_mm"],
        f_number=data["f_number"],
        native_resolution=tuple(data["native_resolution"]),
    )


def _light_to_dict(light: LightPreset) -> dict:
    return {
        "preset_id": light.preset_id,
        "kind": light.kind,
        "intensity": light.intensity,
        "position": list(light.position),
        "direction": list(light.direction),
        "beam_angle": light.beam_angle,
    }


def _light_from_dict(data: dict) -> LightPreset:
    return LightPreset(
        preset_id=data["preset_id"],
        kind=data["kind"],
        intensity=data["intensity"],
        position=tuple(data["position"]),
        direction=tuple(data["direction"]),
        beam_angle=data["beam_angle"],
    )


def serialize_config(config: SceneConfig) -> str:
    document = {
        "plate": {
            "region": config.plate.region,
            "middle": config.plate.middle,
            "digits": config.plate.digits,
        },
        "camera": _camera_to_dict(config.camera),
        "light": _light_to_dict(config.light),
        "trajectory_seed": config.trajectory_seed,
        "resolution": list(config.resolution),
        "scene_length": config.scene_length,
        "depth_range": list(config.depth_range),
    }
    body = json.dumps(document, sort_keys=True, indent=2)
    return f"{FORMAT_HEADER}\n{body}\n"


def parse_config(text: str) -> SceneConfig:
    header, _, body = text.partition("\n")
    if header.strip() != FORMAT_HEADER:
        raise ConfigError(
            f"unsupported config header {header.strip()!r}; expected {FORMAT_HEADER!r}"
        )
    try:
        data = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config body is not valid JSON: {exc}") from exc
    try:
        return SceneConfig(
            plate=PlateString(**data["plate"]),
            camera=_camera_from_dict(data["camera"]),
            light=_light_from_dict(data["light"]),
            trajectory_seed=data["trajectory_seed"],
            resolution=tuple(data["resolution"]),
            scene_length=data["scene_length"],
            depth_range=tuple(data["depth_range"]),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"config document is missing or mistypes a field: {exc}") from exc


def load_preset_bank(path) -> tuple[dict[str, CameraPreset], dict[str, LightPreset]]:
    """Read camera and light presets from a JSON bank file.

    The document holds two arrays, "cameras" and "lights", whose entries
    use the same field layout as the snapshots embedded in config files.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"preset bank is not valid JSON: {exc}") from exc
    try:
        cameras = [_camera_from_dict(entry) for entry in data["cameras"]]
        lights = [_light_from_dict(entry) for entry in data["lights"]]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"preset bank is missing or mistypes a field: {exc}") from exc
    return (
        {camera.preset_id: camera for camera in cameras},
        {light.preset_id: light for light in lights},
    )


def write_config(config: SceneConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_config(config))


def read_config(path) -> SceneConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
