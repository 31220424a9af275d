"""Pinhole camera model, light sources, and the built-in preset banks.

Coordinate conventions (fixed for the whole package):

* World frame: x right, y up, z forward.  A camera with zero tilt looks
  along +z.
* Tilt is (pitch, yaw, roll) in radians, composed as
  ``R = Ry(yaw) @ Rx(pitch) @ Rz(roll)`` mapping camera coordinates to
  world coordinates.  Positive pitch looks up, positive yaw looks right
  (toward +x) for a +z-facing camera.
* Image frame: origin at the top-left pixel corner, x right, y down.
  A world point p projects through

      pc = R.T @ (p - position)            # camera coordinates
      x  = cx + fx * pc.x / pc.z
      y  = cy - fy * pc.y / pc.z

  with fx = focal_mm * res_w / sensor_w_mm, fy = focal_mm * res_h /
  sensor_h_mm, and (cx, cy) the image center.  Intrinsics scale with the
  requested render resolution; ``native_resolution`` records the preset's
  nominal sensor resolution and does not enter projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ProjectionError

SUN = "sun"
SPOT = "spot"
AREA = "area"
LIGHT_KINDS = (SUN, SPOT, AREA)


def rotation_matrix(tilt: tuple[float, float, float]) -> np.ndarray:
    """Camera-to-world rotation for (pitch, yaw, roll)."""
    pitch, yaw, roll = tilt
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    cr, sr = math.cos(roll), math.sin(roll)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cp, -sp], [0.0, sp, cp]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rz = np.array([[cr, -sr, 0.0], [sr, cr, 0.0], [0.0, 0.0, 1.0]])
    return ry @ rx @ rz


@dataclass(frozen=True)
class CameraPreset:
    """One camera model: pose plus physical intrinsics."""

    preset_id: str
    position: tuple[float, float, float]
    tilt: tuple[float, float, float]
    sensor_size_mm: tuple[float, float]
    focal_length_mm: float
    f_number: float
    native_resolution: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.preset_id:
            raise ConfigError("camera preset_id must be non-empty")
        if self.focal_length_mm <= 0:
            raise ConfigError(f"focal length must be positive, got {self.focal_length_mm}")
        if self.f_number <= 0:
            raise ConfigError(f"f-number must be positive, got {self.f_number}")
        if min(self.sensor_size_mm) <= 0:
            raise ConfigError(f"sensor size must be positive, got {self.sensor_size_mm}")
        if min(self.native_resolution) <= 0:
            raise ConfigError(f"native resolution must be positive, got {self.native_resolution}")

    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.tilt)

    def intrinsics(self, resolution: tuple[int, int]) -> tuple[float, float, float, float]:
        """(fx, fy, cx, cy) in pixels for a given render resolution."""
        res_w, res_h = resolution
        fx = self.focal_length_mm * res_w / self.sensor_size_mm[0]
        fy = self.focal_length_mm * res_h / self.sensor_size_mm[1]
        return fx, fy, res_w / 2.0, res_h / 2.0


@dataclass(frozen=True)
class LightPreset:
    """One light source.

    * sun: parallel rays along ``direction``; no distance falloff.
    * spot: point source at ``position`` shining along ``direction`` inside
      a cone of full angle ``beam_angle``; inverse-square falloff and a
      smooth edge between 0.8x and 1.0x the half angle.
    * area: point-like diffuse source at ``position``; inverse-square
      falloff, no direction.
    """

    preset_id: str
    kind: str
    intensity: float
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    direction: tuple[float, float, float] = (0.0, 0.0, 1.0)
    beam_angle: float = math.pi / 2

    def __post_init__(self) -> None:
        if not self.preset_id:
            raise ConfigError("light preset_id must be non-empty")
        if self.kind not in LIGHT_KINDS:
            raise ConfigError(f"unknown light kind {self.kind!r}")
        if self.intensity < 0:
            raise ConfigError(f"intensity must be non-negative, got {self.intensity}")
        norm = math.sqrt(sum(c * c for c in self.direction))
        if self.kind in (SUN, SPOT) and abs(norm - 1.0) > 1e-6:
            raise ConfigError(f"light direction must be unit length, |d|={norm:.8f}")
        if self.kind == SPOT and not (0.0 < self.beam_angle <= math.pi):
            raise ConfigError(f"spot beam angle must be in (0, pi], got {self.beam_angle}")


def project_point(
    camera: CameraPreset,
    point: np.ndarray,
    resolution: tuple[int, int] | None = None,
) -> tuple[float, float, float]:
    """Project a world point; returns (x_px, y_px, depth).

    Pixel coordinates refer to ``resolution`` (the camera's native
    resolution when omitted).  Raises ProjectionError when the point is at
    or behind the camera plane.
    """
    resolution = camera.native_resolution if resolution is None else resolution
    rot = camera.rotation()
    pc = rot.T @ (np.asarray(point, dtype=np.float64) - np.asarray(camera.position))
    if pc[2] <= 1e-9:
        raise ProjectionError(f"point depth {pc[2]:.3e} is not in front of the camera")
    fx, fy, cx, cy = camera.intrinsics(resolution)
    return (
        cx + fx * pc[0] / pc[2],
        cy - fy * pc[1] / pc[2],
        float(pc[2]),
    )


def unproject_pixel(
    camera: CameraPreset,
    pixel: tuple[float, float],
    depth: float,
    resolution: tuple[int, int] | None = None,
) -> np.ndarray:
    """World point whose projection is ``pixel`` at camera depth ``depth``."""
    resolution = camera.native_resolution if resolution is None else resolution
    if depth <= 0:
        raise ProjectionError(f"depth must be positive, got {depth}")
    fx, fy, cx, cy = camera.intrinsics(resolution)
    pc = np.array(
        [
            (pixel[0] - cx) / fx * depth,
            -(pixel[1] - cy) / fy * depth,
            depth,
        ]
    )
    return camera.rotation() @ pc + np.asarray(camera.position, dtype=np.float64)


def _unit(v: tuple[float, float, float]) -> tuple[float, float, float]:
    n = math.sqrt(sum(c * c for c in v))
    return (v[0] / n, v[1] / n, v[2] / n)


# Built-in preset banks.  Positions are metres in the world frame; the
# rendered car sits in front of the camera around z = 2..8 m, so every
# preset keeps the origin-facing half space in view.
DEFAULT_CAMERAS: tuple[CameraPreset, ...] = (
    CameraPreset("compact_24mm", (0.0, 1.2, 0.0), (-0.05, 0.0, 0.0), (36.0, 20.25), 24.0, 4.0, (1920, 1080)),
    CameraPreset("standard_35mm", (0.0, 1.4, 0.0), (-0.06, 0.0, 0.0), (36.0, 20.25), 35.0, 2.8, (1920, 1080)),
    CameraPreset("portrait_50mm", (0.2, 1.5, 0.0), (-0.08, -0.02, 0.0), (36.0, 20.25), 50.0, 1.8, (2560, 1440)),
    CameraPreset("tele_85mm", (-0.3, 1.8, 0.0), (-0.12, 0.03, 0.0), (36.0, 20.25), 85.0, 2.0, (3840, 2160)),
    CameraPreset("crop_28mm", (0.1, 1.0, 0.0), (-0.02, -0.01, 0.01), (23.6, 13.3), 28.0, 5.6, (1920, 1080)),
    CameraPreset("crop_45mm", (-0.1, 2.2, 0.0), (-0.18, 0.02, 0.0), (23.6, 13.3), 45.0, 4.0, (2560, 1440)),
    CameraPreset("phone_6mm", (0.0, 1.1, 0.0), (-0.03, 0.0, 0.0), (9.8, 5.5), 6.0, 1.9, (3840, 2160)),
)

# Positional lights stay near the camera plane (z <= 0.5) so plates facing
# the camera are front-lit over the whole 2..8 m depth range; suns keep a
# positive z component for the same reason.
DEFAULT_LIGHTS: tuple[LightPreset, ...] = (
    LightPreset("sun_noon", SUN, 1.0, direction=_unit((0.15, -0.8, 0.75))),
    LightPreset("sun_evening", SUN, 0.7, direction=_unit((-0.6, -0.25, 0.75))),
    LightPreset("sun_overcast", SUN, 0.45, direction=_unit((0.0, -0.5, 0.87))),
    LightPreset("spot_street", SPOT, 45.0, position=(1.5, 4.0, 0.0), direction=_unit((-0.25, -0.5, 0.83)), beam_angle=1.7),
    LightPreset("spot_narrow", SPOT, 35.0, position=(-1.2, 3.0, 0.2), direction=_unit((0.25, -0.4, 1.0)), beam_angle=1.1),
    LightPreset("area_garage", AREA, 30.0, position=(0.0, 2.8, 0.3)),
    LightPreset("area_side", AREA, 25.0, position=(2.5, 1.5, 0.5)),
)


def camera_bank() -> dict[str, CameraPreset]:
    return {preset.preset_id: preset for preset in DEFAULT_CAMERAS}


def light_bank() -> dict[str, LightPreset]:
    return {preset.preset_id: preset for preset in DEFAULT_LIGHTS}
