"""Deterministic scanline rasterizer for plate scenes.

The scene is two textured quads ray-cast per pixel center (painter's
order: car rear, then plate, which always sits nearer the camera), lit by
one preset light plus a constant ambient term, followed by an optional
full-frame depth-of-field Gaussian.  Annotations come from exact projected
corner geometry, never from pixels, and are computed before any blur.

Conventions:

* Plate orientation is fixed: plane parallel to world x/y, normal on -z
  (toward a camera looking along +z).  The trajectory moves only the
  center.
* The car rear quad (1.7 m x 1.1 m) hangs 0.42 m above and 0.04 m behind
  the plate center, so the plate always lies in front of it.
* Background is black; shading can exceed 1.0 and is clipped at the final
  8-bit quantization floor(clip(v)*255 + 0.5).
* Fully behind-camera plates produce a black frame flagged occluded on all
  four sides with an empty bbox (annotations are never fabricated from
  partial geometry).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .annotations import FrameAnnotation, SequenceAnnotation
from .camera import AREA, SPOT, SUN, CameraPreset, LightPreset
from .errors import ConfigError
from .glyphs import GlyphAtlas
from .plates import PlateString
from .prng import derive_seed
from .scene import SceneConfig
from .textures import (
    CAR_TEXTURE_SIZE,
    PlateGeometry,
    generate_car_rear_texture,
    layout_plate,
    rasterize_plate_texture,
)
from .trajectory import (
    PLATE_NORMAL,
    PLATE_RIGHT,
    PLATE_UP,
    TrajectorySpline,
    evaluate_trajectory,
    sample_trajectory,
)

AMBIENT = 0.15
RENDER_TEXEL_DENSITY = 4.0
CAR_SIZE_M = (1.7, 1.1)
CAR_OFFSET_M = (0.0, 0.42, 0.04)
MIN_DEPTH = 1e-9

# Tag for deriving the car texture seed from the trajectory seed.
_CAR_TEXTURE_TAG = 0x43415254

RENDER_ENGINE = "platesynth-rasterizer 0.1.0"

_LIGHT_KIND_CODES = {SUN: kernels.pure.KIND_SUN, SPOT: kernels.pure.KIND_SPOT, AREA: kernels.pure.KIND_AREA}


@dataclass(frozen=True)
class RenderedFrame:
    """Pixels plus exact annotation; plate_mask is pre-blur quad coverage."""

    pixels: np.ndarray
    annotation: FrameAnnotation
    plate_mask: np.ndarray | None = None


@dataclass(frozen=True)
class SceneAssets:
    """Per-sequence immutable assets shared by all frames."""

    geometry: PlateGeometry
    plate_texture: np.ndarray
    car_texture: np.ndarray
    spline: TrajectorySpline
    focus_depth: float


def _camera_pack(camera: CameraPreset, resolution: tuple[int, int]) -> np.ndarray:
    fx, fy, cx, cy = camera.intrinsics(resolution)
    rot = camera.rotation()
    return np.concatenate(
        [np.asarray(camera.position, dtype=np.float64), rot.reshape(9), [fx, fy, cx, cy]]
    )


def _light_pack(light: LightPreset) -> np.ndarray:
    half = light.beam_angle / 2.0
    return np.array(
        [
            float(_LIGHT_KIND_CODES[light.kind]),
            *light.position,
            *light.direction,
            light.intensity,
            math.cos(half),
            math.cos(0.8 * half),
        ],
        dtype=np.float64,
    )


def _quad_pack(center: np.ndarray, width: float, height: float) -> np.ndarray:
    """Quad pack for a plate-oriented rectangle: top-left origin, ex right, ey down."""
    right = np.asarray(PLATE_RIGHT)
    up = np.asarray(PLATE_UP)
    origin = center - right * (width / 2.0) + up * (height / 2.0)
    ex = right * width
    ey = -up * height
    return np.concatenate([origin, ex, ey])


def _project_algebraic(
    cam: np.ndarray, point: np.ndarray
) -> tuple[float, float, float]:
    """Pinhole projection without the in-front check; returns (x, y, depth)."""
    ox, oy, oz = cam[0], cam[1], cam[2]
    r = cam[3:12].reshape(3, 3)
    pc = r.T @ (point - np.array([ox, oy, oz]))
    fx, fy, cx, cy = cam[12], cam[13], cam[14], cam[15]
    if pc[2] == 0.0:
        return math.inf, math.inf, 0.0
    return cx + fx * pc[0] / pc[2], cy - fy * pc[1] / pc[2], float(pc[2])


def _quad_corners(center: np.ndarray, width: float, height: float) -> np.ndarray:
    right = np.asarray(PLATE_RIGHT)
    up = np.asarray(PLATE_UP)
    hw, hh = width / 2.0, height / 2.0
    return np.array(
        [
            center - right * hw + up * hh,
            center + right * hw + up * hh,
            center + right * hw - up * hh,
            center - right * hw - up * hh,
        ]
    )


def _clip_polygon_to_rect(points: list[tuple[float, float]], width: float, height: float):
    """Sutherland-Hodgman clip of a polygon against [0,width] x [0,height]."""

    def clip_edge(poly, inside, intersect):
        result = []
        n = len(poly)
        for i in range(n):
            current = poly[i]
            previous = poly[i - 1]
            cur_in = inside(current)
            prev_in = inside(previous)
            if cur_in:
                if not prev_in:
                    result.append(intersect(previous, current))
                result.append(current)
            elif prev_in:
                result.append(intersect(previous, current))
        return result

    def cross_x(bound):
        def intersect(a, b):
            t = (bound - a[0]) / (b[0] - a[0])
            return (bound, a[1] + t * (b[1] - a[1]))

        return intersect

    def cross_y(bound):
        def intersect(a, b):
            t = (bound - a[1]) / (b[1] - a[1])
            return (a[0] + t * (b[0] - a[0]), bound)

        return intersect

    poly = list(points)
    for inside, intersect in (
        (lambda p: p[0] >= 0.0, cross_x(0.0)),
        (lambda p: p[0] <= width, cross_x(width)),
        (lambda p: p[1] >= 0.0, cross_y(0.0)),
        (lambda p: p[1] <= height, cross_y(height)),
    ):
        poly = clip_edge(poly, inside, intersect)
        if not poly:
            return []
    return poly


def annotate_corners(
    corners_px: np.ndarray,
    resolution: tuple[int, int],
    label: str,
    frame_index: int,
) -> FrameAnnotation:
    """Build the frame annotation from projected corner geometry.

    bbox = integer hull of the corner quad clipped to the image rectangle;
    occlusion flags compare the unclamped hull against image bounds
    (strictly exceeding on a side sets that side's flag).
    """
    width, height = float(resolution[0]), float(resolution[1])
    xs = corners_px[:, 0]
    ys = corners_px[:, 1]
    sides = []
    if xs.min() < 0.0:
        sides.append("left")
    if xs.max() > width:
        sides.append("right")
    if ys.min() < 0.0:
        sides.append("top")
    if ys.max() > height:
        sides.append("bottom")

    visible = _clip_polygon_to_rect([tuple(p) for p in corners_px], width, height)
    if visible:
        vx = [p[0] for p in visible]
        vy = [p[1] for p in visible]
        x0 = max(0, math.floor(min(vx)))
        y0 = max(0, math.floor(min(vy)))
        x1 = min(int(width), math.ceil(max(vx)))
        y1 = min(int(height), math.ceil(max(vy)))
        bbox = (x0, y0, x1 - x0, y1 - y0)
    else:
        bbox = (0, 0, 0, 0)

    return FrameAnnotation(
        frame_index=frame_index,
        label=label,
        bbox=bbox,
        corners=tuple((float(x), float(y)) for x, y in corners_px),
        occluded=bool(sides),
        occlusion_sides=tuple(sides),
    )


def _fully_occluded(label: str, frame_index: int, corners_px: np.ndarray) -> FrameAnnotation:
    return FrameAnnotation(
        frame_index=frame_index,
        label=label,
        bbox=(0, 0, 0, 0),
        corners=tuple((float(x), float(y)) for x, y in corners_px),
        occluded=True,
        occlusion_sides=("left", "right", "top", "bottom"),
    )


def _dof_sigma(
    camera: CameraPreset,
    resolution: tuple[int, int],
    focus_depth: float,
    subject_depth: float,
) -> float:
    """Thin-lens circle of confusion at the subject, as a Gaussian sigma in px."""
    focal_m = camera.focal_length_mm / 1000.0
    if focus_depth <= focal_m or subject_depth <= 0.0:
        return 0.0
    coc_m = (
        (focal_m * focal_m) / (camera.f_number * (focus_depth - focal_m))
        * abs(subject_depth - focus_depth) / subject_depth
    )
    px_per_m = resolution[0] / (camera.sensor_size_mm[0] / 1000.0)
    return 0.5 * coc_m * px_per_m


def _raster_region(
    cam: np.ndarray, quad: np.ndarray, resolution: tuple[int, int]
) -> tuple[int, int, int, int]:
    """Pixel bbox covering a quad's projection, or the full frame if unsure."""
    width, height = resolution
    origin = quad[0:3]
    ex = quad[3:6]
    ey = quad[6:9]
    corners = [origin, origin + ex, origin + ex + ey, origin + ey]
    xs, ys = [], []
    for corner in corners:
        x, y, depth = _project_algebraic(cam, np.asarray(corner))
        if depth <= MIN_DEPTH:
            return (0, 0, width, height)
        xs.append(x)
        ys.append(y)
    x0 = max(0, math.floor(min(xs)) - 1)
    y0 = max(0, math.floor(min(ys)) - 1)
    x1 = min(width, math.ceil(max(xs)) + 1)
    y1 = min(height, math.ceil(max(ys)) + 1)
    if x0 >= x1 or y0 >= y1:
        return (0, 0, 0, 0)
    return (x0, y0, x1, y1)


def prepare_assets(config: SceneConfig, atlas: GlyphAtlas | None = None) -> SceneAssets:
    """Build the per-sequence assets: textures, layout, trajectory, focus."""
    geometry = layout_plate(config.plate)
    plate_texture = rasterize_plate_texture(
        config.plate, geometry, RENDER_TEXEL_DENSITY, atlas
    )
    car_texture = generate_car_rear_texture(
        derive_seed(config.trajectory_seed, _CAR_TEXTURE_TAG), CAR_TEXTURE_SIZE
    )
    spline = sample_trajectory(
        config.trajectory_seed, config.camera, config.depth_range, config.scene_length
    )
    cam = _camera_pack(config.camera, config.resolution)
    start = evaluate_trajectory(spline, 0)
    _, _, focus_depth = _project_algebraic(cam, start.position)
    return SceneAssets(
        geometry=geometry,
        plate_texture=plate_texture,
        car_texture=car_texture,
        spline=spline,
        focus_depth=focus_depth,
    )


def render_frame(
    config: SceneConfig,
    frame_index: int,
    assets: SceneAssets | None = None,
    atlas: GlyphAtlas | None = None,
    keep_mask: bool = False,
) -> RenderedFrame:
    """Render one frame and its exact annotation."""
    if assets is None:
        assets = prepare_assets(config, atlas)
    width, height = config.resolution
    pose = evaluate_trajectory(assets.spline, frame_index)
    center = pose.position

    cam = _camera_pack(config.camera, config.resolution)
    plate_w = assets.geometry.width_m
    plate_h = assets.geometry.height_m
    corner_points = _quad_corners(center, plate_w, plate_h)
    projected = [_project_algebraic(cam, p) for p in corner_points]
    corners_px = np.array([[x, y] for x, y, _ in projected])
    depths = np.array([d for _, _, d in projected])
    label = config.plate.label

    if (depths <= MIN_DEPTH).all():
        annotation = _fully_occluded(label, frame_index, corners_px)
        pixels = np.zeros((height, width, 3), dtype=np.uint8)
        mask = np.zeros((height, width), dtype=bool) if keep_mask else None
        return RenderedFrame(pixels=pixels, annotation=annotation, plate_mask=mask)
    if (depths <= MIN_DEPTH).any():
        # Plate straddles the camera plane: treat like fully occluded rather
        # than annotate from mirrored projections.
        annotation = _fully_occluded(label, frame_index, corners_px)
        pixels = np.zeros((height, width, 3), dtype=np.uint8)
        mask = np.zeros((height, width), dtype=bool) if keep_mask else None
        return RenderedFrame(pixels=pixels, annotation=annotation, plate_mask=mask)

    annotation = annotate_corners(corners_px, config.resolution, label, frame_index)

    light = _light_pack(config.light)
    rgb = np.zeros((height, width, 3), dtype=np.float64)

    car_center = center + np.asarray(CAR_OFFSET_M, dtype=np.float64)
    car_quad = _quad_pack(car_center, CAR_SIZE_M[0], CAR_SIZE_M[1])
    car_cov = np.zeros((height, width), dtype=np.uint8)
    region = _raster_region(cam, car_quad, config.resolution)
    kernels.rasterize_quad(rgb, car_cov, cam, car_quad, assets.car_texture, light, AMBIENT, region)

    plate_quad = _quad_pack(center, plate_w, plate_h)
    plate_cov = np.zeros((height, width), dtype=np.uint8)
    region = _raster_region(cam, plate_quad, config.resolution)
    kernels.rasterize_quad(rgb, plate_cov, cam, plate_quad, assets.plate_texture, light, AMBIENT, region)

    _, _, subject_depth = _project_algebraic(cam, center)
    sigma = _dof_sigma(config.camera, config.resolution, assets.focus_depth, subject_depth)
    rgb = kernels.gaussian_blur(rgb, sigma)

    pixels = quantize(rgb)
    mask = plate_cov.astype(bool) if keep_mask else None
    return RenderedFrame(pixels=pixels, annotation=annotation, plate_mask=mask)


def quantize(rgb: np.ndarray) -> np.ndarray:
    """Map float [0,1] (clipped) to uint8 with round-half-up."""
    return np.floor(np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def render_sequence(
    config: SceneConfig,
    atlas: GlyphAtlas | None = None,
    keep_masks: bool = False,
) -> tuple[list[RenderedFrame], SequenceAnnotation]:
    """Render all frames of a config plus the sequence annotation."""
    assets = prepare_assets(config, atlas)
    frames = [
        render_frame(config, index, assets=assets, keep_mask=keep_masks)
        for index in range(config.scene_length)
    ]
    annotation = SequenceAnnotation(
        render_engine=RENDER_ENGINE,
        resolution=config.resolution,
        camera=config.camera,
        light=config.light,
        frames=tuple(f.annotation for f in frames),
    )
    return frames, annotation


def render_print_master(
    plate: PlateString,
    geometry: PlateGeometry | None = None,
    dpi: float = 300.0,
    atlas: GlyphAtlas | None = None,
) -> np.ndarray:
    """Frontal, unlit plate image cropped to plate bounds.

    The texel density is dpi/25.4 per millimeter, so a print at ``dpi``
    measures exactly the physical plate size.  Writers should embed the
    dpi in the image metadata (see imageio.write_png).
    """
    if dpi <= 0:
        raise ConfigError(f"dpi must be positive, got {dpi}")
    if geometry is None:
        geometry = layout_plate(plate)
    density = dpi / 25.4
    texture = rasterize_plate_texture(plate, geometry, density, atlas)
    return quantize(texture)
