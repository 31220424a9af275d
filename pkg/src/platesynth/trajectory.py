"""Plate motion trajectories: seeded sampling and spline evaluation.

A trajectory is a Catmull-Rom spline through four knots [A, C1, C2, B]:
two endpoints (A, B) and two auxiliary interior control points, all drawn
inside the camera frustum.  Uniform parameterization over t in [0, 1] with
knots at t = 0, 1/3, 2/3, 1; phantom end knots by reflection
(2*K0 - K1 and 2*K3 - K2), which makes the spline reduce exactly to a
straight line when the knots are collinear and equally spaced.

Sampling draws each knot as (depth, x-fraction, y-fraction): depth uniform
in the configured range, image position uniform inside the frame with a
relative safety margin, then unprojects through the camera.  Draw order is
A, B, C1, C2 with (depth, x, y) per knot; tests pin this order.

The plate's orientation is held fixed along the path: the plate plane is
parallel to the world x/y plane with its normal on -z, facing a camera
that looks along +z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraPreset, project_point, unproject_pixel
from .errors import TrajectoryError

EDGE_MARGIN_FRACTION = 0.08
MAX_SAMPLE_ATTEMPTS = 100

# Fixed plate orientation: local axes in world coordinates.
PLATE_RIGHT = (1.0, 0.0, 0.0)
PLATE_UP = (0.0, 1.0, 0.0)
PLATE_NORMAL = (0.0, 0.0, -1.0)


@dataclass(frozen=True)
class PlatePose:
    """Plate center position plus the package-wide fixed orientation."""

    position: np.ndarray
    right: tuple[float, float, float] = PLATE_RIGHT
    up: tuple[float, float, float] = PLATE_UP
    normal: tuple[float, float, float] = PLATE_NORMAL


def _catmull_rom_coefficients(knots: np.ndarray) -> np.ndarray:
    """Per-segment cubic coefficients, shape (segments, 4, 3), powers 0..3."""
    padded = np.vstack(
        [
            2.0 * knots[0] - knots[1],
            knots,
            2.0 * knots[-1] - knots[-2],
        ]
    )
    segments = len(knots) - 1
    coeffs = np.empty((segments, 4, 3))
    for s in range(segments):
        p0, p1, p2, p3 = padded[s : s + 4]
        coeffs[s, 0] = p1
        coeffs[s, 1] = 0.5 * (p2 - p0)
        coeffs[s, 2] = 0.5 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3)
        coeffs[s, 3] = 0.5 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3)
    return coeffs


@dataclass(frozen=True)
class TrajectorySpline:
    """Cubic spline through four knots, defined on t in [0, 1]."""

    knots: np.ndarray
    duration: int
    coefficients: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        knots = np.asarray(self.knots, dtype=np.float64)
        if knots.shape != (4, 3):
            raise TrajectoryError(f"expected 4 knots of 3 coordinates, got shape {knots.shape}")
        if self.duration < 1:
            raise TrajectoryError(f"duration must be >= 1 frame, got {self.duration}")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "coefficients", _catmull_rom_coefficients(knots))

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.knots[0].copy(), self.knots[-1].copy()

    @classmethod
    def line(cls, start, end, duration: int) -> "TrajectorySpline":
        """Straight constant-speed line from start to end."""
        start = np.asarray(start, dtype=np.float64)
        end = np.asarray(end, dtype=np.float64)
        knots = np.array([start + (end - start) * t for t in (0.0, 1 / 3, 2 / 3, 1.0)])
        return cls(knots=knots, duration=duration)

    def evaluate(self, t: float) -> np.ndarray:
        """Position at normalized time t in [0, 1]."""
        if not (0.0 <= t <= 1.0):
            raise TrajectoryError(f"t={t} outside [0, 1]")
        segments = len(self.coefficients)
        s = min(int(t * segments), segments - 1)
        u = t * segments - s
        c = self.coefficients[s]
        return c[0] + u * (c[1] + u * (c[2] + u * c[3]))


def sample_trajectory(
    seed: int,
    camera: CameraPreset,
    depth_range: tuple[float, float],
    duration: int,
    margin_fraction: float = EDGE_MARGIN_FRACTION,
) -> TrajectorySpline:
    """Draw a trajectory whose knots all lie inside the camera frustum.

    The image rectangle used for the in-frustum draws is the camera's
    native resolution; because intrinsics scale with resolution, a point
    inside that rectangle is inside the frame at every render resolution.
    """
    near, far = depth_range
    if not (0 < near < far):
        raise TrajectoryError(f"depth range must satisfy 0 < near < far, got {depth_range}")
    if not (0.0 <= margin_fraction < 0.5):
        raise TrajectoryError(f"margin fraction must be in [0, 0.5), got {margin_fraction}")

    from .prng import SplitMix64

    rng = SplitMix64(seed)
    res = camera.native_resolution
    width, height = float(res[0]), float(res[1])

    def draw_knot() -> np.ndarray:
        for _ in range(MAX_SAMPLE_ATTEMPTS):
            depth = rng.uniform(near, far)
            px = (margin_fraction + (1.0 - 2.0 * margin_fraction) * rng.next_float()) * width
            py = (margin_fraction + (1.0 - 2.0 * margin_fraction) * rng.next_float()) * height
            point = unproject_pixel(camera, (px, py), depth, res)
            x, y, z = project_point(camera, point, res)
            if 0.0 <= x <= width and 0.0 <= y <= height and z > 0:
                return point
        raise TrajectoryError(
            f"could not draw an in-frustum knot in {MAX_SAMPLE_ATTEMPTS} attempts"
        )

    start = draw_knot()
    end = draw_knot()
    interior_1 = draw_knot()
    interior_2 = draw_knot()
    knots = np.array([start, interior_1, interior_2, end])
    return TrajectorySpline(knots=knots, duration=duration)


def evaluate_trajectory(spline: TrajectorySpline, frame_index: int) -> PlatePose:
    """Plate pose at a frame: t = frame_index / (duration - 1), t=0 for 1-frame scenes."""
    if not (0 <= frame_index < spline.duration):
        raise TrajectoryError(
            f"frame index {frame_index} outside [0, {spline.duration})"
        )
    if spline.duration == 1:
        t = 0.0
    else:
        t = frame_index / (spline.duration - 1)
    return PlatePose(position=spline.evaluate(t))
