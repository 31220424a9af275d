"""OCR sample preparation: rotation-only deskew and uniform-height crops.

The minimal enclosing rotated rectangle of the annotated corner points
determines a rotation angle; the sample is rotated by exactly that angle
about the rectangle center (shear and perspective stay in by design),
cropped to the now axis-aligned rectangle, and scaled to a uniform height.
The whole chain is one composed bilinear warp, so a sample is resampled
once.

Synthetic and partly-real samples use the exact projected corners from
their annotations; real samples annotated with an axis-aligned bbox fall
back to the bbox corners, whose minimal rectangle has angle zero, making
deskew a plain crop for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .annotations import FrameAnnotation
from .errors import ConfigError, GeometryError

H_OUT_DEFAULT = 48

DATA_TYPES = ("synthetic", "partly_real", "real")


@dataclass(frozen=True)
class RotatedRect:
    """Minimal enclosing rotated rectangle.

    ``angle_deg`` is in [0, 90): the direction of the edge whose extent is
    ``size[0]``, counterclockwise from +x in image coordinates.
    """

    center: tuple[float, float]
    size: tuple[float, float]
    angle_deg: float

    @property
    def area(self) -> float:
        return self.size[0] * self.size[1]


@dataclass(frozen=True)
class SampleProvenance:
    data_type: str
    sequence_id: str
    frame_index: int

    def __post_init__(self) -> None:
        if self.data_type not in DATA_TYPES:
            raise ConfigError(f"unknown data type {self.data_type!r}")

    @property
    def sample_id(self) -> str:
        return f"{self.data_type}/{self.sequence_id}/{self.frame_index:06d}"


@dataclass(frozen=True)
class PreppedSample:
    """One OCR-ready crop with its label and origin."""

    image: np.ndarray
    label: str
    provenance: SampleProvenance

    def __post_init__(self) -> None:
        if not self.label:
            raise ConfigError("prepped sample label must be non-empty")
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise ConfigError(f"prepped sample image must be RGB, got {self.image.shape}")


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain convex hull, counterclockwise, no collinear vertices."""
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) < 3:
        raise GeometryError(f"need >= 3 distinct points, got {len(pts)}")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise GeometryError("points are collinear")
    return np.asarray(hull, dtype=np.float64)


def min_area_rect(corners) -> RotatedRect:
    """Smallest-area enclosing rotated rectangle (rotating calipers).

    The optimum rectangle shares a direction with some hull edge, so the
    sweep over hull edges is exact, not an approximation.
    """
    points = np.asarray(corners, dtype=np.float64)
    hull = _convex_hull(points)
    n = len(hull)
    best: tuple[float, float, float, float, float, float] | None = None
    for i in range(n):
        edge = hull[(i + 1) % n] - hull[i]
        length = math.hypot(edge[0], edge[1])
        if length == 0.0:
            continue
        cos_t = edge[0] / length
        sin_t = edge[1] / length
        xs = hull[:, 0] * cos_t + hull[:, 1] * sin_t
        ys = -hull[:, 0] * sin_t + hull[:, 1] * cos_t
        w = xs.max() - xs.min()
        h = ys.max() - ys.min()
        area = w * h
        if best is None or area < best[0]:
            cx_r = (xs.max() + xs.min()) / 2.0
            cy_r = (ys.max() + ys.min()) / 2.0
            best = (area, w, h, cx_r, cy_r, math.atan2(sin_t, cos_t))
    if best is None:
        raise GeometryError("points are collinear")
    _, w, h, cx_r, cy_r, theta = best
    cx = cx_r * math.cos(theta) - cy_r * math.sin(theta)
    cy = cx_r * math.sin(theta) + cy_r * math.cos(theta)

    angle = math.degrees(theta) % 180.0
    if angle >= 90.0:
        angle -= 90.0
        w, h = h, w
    return RotatedRect(center=(cx, cy), size=(w, h), angle_deg=angle)


def bbox_corners(bbox: tuple[int, int, int, int]) -> np.ndarray:
    """Corner points (TL, TR, BR, BL) of an axis-aligned bbox."""
    x, y, w, h = bbox
    return np.array(
        [[x, y], [x + w, y], [x + w, y + h], [x, y + h]], dtype=np.float64
    )


def deskew_matrix(
    rect: RotatedRect, h_out: int
) -> tuple[np.ndarray, tuple[int, int], float]:
    """Output-to-source warp matrix for rotation removal plus crop/scale.

    Returns (matrix, (out_w, out_h), rotation_deg).  rotation_deg is the
    signed rotation removed; the long rectangle side ends up horizontal.
    """
    if h_out < 1:
        raise ConfigError(f"output height must be >= 1, got {h_out}")
    w, h = rect.size
    rotation = rect.angle_deg if w >= h else rect.angle_deg - 90.0
    crop_w, crop_h = (w, h) if w >= h else (h, w)
    if crop_h <= 0.0 or crop_w <= 0.0:
        raise GeometryError("degenerate rectangle (zero extent)")
    scale = h_out / crop_h
    out_w = max(1, round(crop_w * scale))
    out_h = h_out

    theta = math.radians(rotation)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cx, cy = rect.center
    # Output pixel -> unscale -> center at origin -> rotate back -> translate.
    to_center = np.array(
        [
            [1.0 / scale, 0.0, -crop_w / 2.0],
            [0.0, 1.0 / scale, -crop_h / 2.0],
            [0.0, 0.0, 1.0],
        ]
    )
    rotate = np.array(
        [[cos_t, -sin_t, cx], [sin_t, cos_t, cy], [0.0, 0.0, 1.0]]
    )
    return rotate @ to_center, (out_w, out_h), rotation


def deskew_crop(image: np.ndarray, corners, h_out: int = H_OUT_DEFAULT) -> np.ndarray:
    """Rotation-compensated, height-normalized crop around the corners."""
    rect = min_area_rect(corners)
    matrix, out_size, _ = deskew_matrix(rect, h_out)
    src = np.ascontiguousarray(image, dtype=np.float64)
    warped = kernels.warp_perspective(src, matrix, out_size, fill=0.0)
    return np.floor(np.clip(warped, 0.0, 255.0) + 0.5).astype(np.uint8)


def prep_frame(
    image: np.ndarray,
    annotation: FrameAnnotation,
    provenance: SampleProvenance,
    h_out: int = H_OUT_DEFAULT,
    use_corners: bool = True,
) -> PreppedSample:
    """Prepare one annotated frame for OCR consumption."""
    if use_corners:
        corners = np.asarray(annotation.corners, dtype=np.float64)
    else:
        corners = bbox_corners(annotation.bbox)
    crop = deskew_crop(image, corners, h_out)
    return PreppedSample(image=crop, label=annotation.label, provenance=provenance)


def write_manifest(entries, path) -> None:
    """Write the sample manifest: image path, label, provenance per line."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for image_path, sample in entries:
            p = sample.provenance
            fh.write(
                f"{image_path}\t{sample.label}\t{p.data_type}\t{p.sequence_id}\t{p.frame_index}\n"
            )


def read_manifest(path) -> list[tuple[str, str, SampleProvenance]]:
    """Parse a manifest into (image path, label, provenance) tuples."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ConfigError(f"manifest line {line_no} has {len(parts)} fields, expected 5")
            image_path, label, data_type, sequence_id, frame_index = parts
            rows.append(
                (image_path, label, SampleProvenance(data_type, sequence_id, int(frame_index)))
            )
    return rows
