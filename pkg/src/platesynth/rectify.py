"""Recorded-screen rectification: quad detection, homography, index decode.

Pipeline per recorded frame (all failures are per-frame outcomes, never
aborts): locate the displayed canvas via the injected fiducials, estimate
the canvas-to-image homography by normalized DLT, inverse-warp the full
canvas back to its native size, decode the frame index from the marker
strip, and transfer the source annotation by the embed offset.  A frame
without a decoded index never produces an annotation.

Homography convention: ``estimate_homography(src, dst)`` returns H with
``dst ~ H @ (x, y, 1)``.  The rectifier estimates canvas -> image, which
is exactly the inverse-warp matrix the warp kernel consumes (output pixel
coordinates to source pixel coordinates).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import kernels
from .annotations import FrameAnnotation, SequenceAnnotation
from .errors import (
    ConfigError,
    DegenerateHomographyError,
    IndexUndecodableError,
    QuadNotFoundError,
    RectifyError,
)
from .playback import STRIP_CELLS, PlaybackLayout, decode_index_bits

STATUS_OK = "ok"

# Fiducial core detection thresholds (gray levels 0..255).
_DARK_LEVEL = 80.0
_BRIGHT_LEVEL = 175.0
_MIN_CORE_AREA = 64
_RING_RADII = (1.5, 2.5, 3.5)
_RING_HITS_REQUIRED = 6

# Bright-quad fallback gates.
_FALLBACK_BRIGHT = 100.0
_FALLBACK_MIN_AREA_FRACTION = 0.05
_FALLBACK_MIN_FILL = 0.85


@dataclass(frozen=True)
class Homography:
    """3x3 projective transform, normalized to h[2][2] = 1 when possible."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.shape != (3, 3):
            raise DegenerateHomographyError(f"expected 3x3 matrix, got {matrix.shape}")
        if abs(matrix[2, 2]) > 1e-12:
            matrix = matrix / matrix[2, 2]
        if abs(np.linalg.det(matrix)) <= 1e-12:
            raise DegenerateHomographyError("homography is not invertible")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        homogeneous = np.hstack([pts, np.ones((len(pts), 1))])
        mapped = homogeneous @ self.matrix.T
        return mapped[:, :2] / mapped[:, 2:3]

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.matrix))


@dataclass(frozen=True)
class DisplayQuad:
    """Detected display corners with their canvas-frame anchor points."""

    corners: np.ndarray
    anchors: np.ndarray
    method: str


@dataclass(frozen=True)
class RectifyOutcome:
    """Per-frame result; status 'ok' iff all optional fields are present."""

    status: str
    rectified: np.ndarray | None = None
    frame_index: int | None = None
    bbox: tuple[int, int, int, int] | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        complete = (
            self.rectified is not None
            and self.frame_index is not None
            and self.bbox is not None
        )
        if (self.status == STATUS_OK) != complete:
            raise ConfigError(
                f"outcome fields inconsistent with status {self.status!r}"
            )


def _normalization(points: np.ndarray) -> np.ndarray:
    """Hartley similarity: centroid to origin, mean distance sqrt(2)."""
    centroid = points.mean(axis=0)
    distances = np.sqrt(((points - centroid) ** 2).sum(axis=1))
    mean_dist = distances.mean()
    if mean_dist <= 0.0:
        raise DegenerateHomographyError("all points coincide")
    scale = np.sqrt(2.0) / mean_dist
    return np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )


def estimate_homography(src, dst) -> Homography:
    """Normalized DLT from >= 4 point correspondences."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise DegenerateHomographyError(
            f"need matching (n, 2) point arrays, got {src.shape} and {dst.shape}"
        )
    n = len(src)
    if n < 4:
        raise DegenerateHomographyError(f"need >= 4 correspondences, got {n}")

    t_src = _normalization(src)
    t_dst = _normalization(dst)
    src_n = (np.hstack([src, np.ones((n, 1))]) @ t_src.T)[:, :2]
    dst_n = (np.hstack([dst, np.ones((n, 1))]) @ t_dst.T)[:, :2]

    a = np.zeros((2 * n, 9))
    for i, ((x, y), (u, v)) in enumerate(zip(src_n, dst_n)):
        a[2 * i] = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]
        a[2 * i + 1] = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]

    _, singular, vh = np.linalg.svd(a)
    if singular[0] <= 0.0 or singular[7] / singular[0] < 1e-10:
        raise DegenerateHomographyError(
            "correspondences are degenerate (collinear or coincident points)"
        )
    h_norm = vh[-1].reshape(3, 3)
    matrix = np.linalg.inv(t_dst) @ h_norm @ t_src
    return Homography(matrix)


def rectify(
    image: np.ndarray,
    homography: Homography,
    out_size: tuple[int, int] = (1920, 1080),
) -> np.ndarray:
    """Inverse-warp a recorded image into the frame H maps from.

    ``homography`` maps output pixel coordinates to recorded-image pixel
    coordinates.  Bilinear sampling; out-of-source pixels black.
    """
    src = np.ascontiguousarray(image, dtype=np.float64)
    warped = kernels.warp_perspective(src, homography.matrix, out_size, fill=0.0)
    return np.floor(np.clip(warped, 0.0, 255.0) + 0.5).astype(np.uint8)


def _gray(image: np.ndarray) -> np.ndarray:
    levels = image.astype(np.float64)
    return (levels[:, :, 0] + levels[:, :, 1] + levels[:, :, 2]) / 3.0


def _ring_ok(gray: np.ndarray, cx: float, cy: float, radius: float, band: str) -> bool:
    """Sample 8 compass rays on a square ring and classify against the band.

    The ring is square (constant Chebyshev distance), matching the nested
    square shape of the markers: diagonal rays would otherwise land in the
    wrong band.
    """
    height, width = gray.shape
    hits = 0
    for k in range(8):
        angle = k * (np.pi / 4.0)
        dx = np.cos(angle)
        dy = np.sin(angle)
        scale = radius / max(abs(dx), abs(dy))
        x = int(round(cx + scale * dx))
        y = int(round(cy + scale * dy))
        if not (0 <= x < width and 0 <= y < height):
            continue
        value = gray[y, x]
        if band == "bright" and value > _BRIGHT_LEVEL:
            hits += 1
        elif band == "dark" and value < _DARK_LEVEL:
            hits += 1
        elif band == "mid" and _DARK_LEVEL <= value <= _BRIGHT_LEVEL:
            hits += 1
    return hits >= _RING_HITS_REQUIRED


def _fiducial_candidates(gray: np.ndarray) -> list[tuple[float, float]]:
    """Centers of dark cores that are wrapped in white/dark/gray rings."""
    height, width = gray.shape
    labels, count = ndimage.label(gray < _DARK_LEVEL)
    if count == 0:
        return []
    centers = []
    slices = ndimage.find_objects(labels)
    for index, slc in enumerate(slices, start=1):
        if slc is None:
            continue
        box_h = slc[0].stop - slc[0].start
        box_w = slc[1].stop - slc[1].start
        mask = labels[slc] == index
        area = int(mask.sum())
        if area < _MIN_CORE_AREA or area > 0.02 * gray.size:
            continue
        aspect = box_w / box_h
        if not (0.4 <= aspect <= 2.5):
            continue
        if area / (box_w * box_h) < 0.7:
            continue
        ys, xs = np.nonzero(mask)
        cy = float(ys.mean()) + slc[0].start + 0.5
        cx = float(xs.mean()) + slc[1].start + 0.5
        # Ring radii scale with the core size: for the nominal 48px core
        # (half=24), 1.5/2.5/3.5 x half lands in the white square, the
        # outer dark square, and the gray background respectively.
        half = np.sqrt(area) / 2.0
        if not _ring_ok(gray, cx, cy, _RING_RADII[0] * half, "bright"):
            continue
        if not _ring_ok(gray, cx, cy, _RING_RADII[1] * half, "dark"):
            continue
        if not _ring_ok(gray, cx, cy, _RING_RADII[2] * half, "mid"):
            continue
        centers.append((cx, cy))
    return centers


def _order_corners(points: np.ndarray) -> np.ndarray:
    """Order four points TL, TR, BR, BL by coordinate-sum/difference."""
    sums = points[:, 0] + points[:, 1]
    diffs = points[:, 0] - points[:, 1]
    tl = points[int(np.argmin(sums))]
    br = points[int(np.argmax(sums))]
    tr = points[int(np.argmax(diffs))]
    bl = points[int(np.argmin(diffs))]
    ordered = np.array([tl, tr, br, bl])
    if len({tuple(p) for p in ordered}) != 4:
        raise QuadNotFoundError("corner ordering is ambiguous")
    return ordered


def _is_convex(quad: np.ndarray) -> bool:
    signs = []
    for i in range(4):
        a = quad[(i + 1) % 4] - quad[i]
        b = quad[(i + 2) % 4] - quad[(i + 1) % 4]
        signs.append(np.sign(a[0] * b[1] - a[1] * b[0]))
    signs = [s for s in signs if s != 0]
    return bool(signs) and all(s == signs[0] for s in signs)


def _fallback_bright_quad(gray: np.ndarray) -> np.ndarray:
    """Largest bright, solid, border-free component's extreme corners."""
    height, width = gray.shape
    labels, count = ndimage.label(gray > _FALLBACK_BRIGHT)
    best = None
    best_area = 0
    for index in range(1, count + 1):
        mask = labels == index
        area = int(mask.sum())
        if area < _FALLBACK_MIN_AREA_FRACTION * gray.size or area <= best_area:
            continue
        ys, xs = np.nonzero(mask)
        if xs.min() == 0 or ys.min() == 0 or xs.max() == width - 1 or ys.max() == height - 1:
            continue
        box_area = (xs.max() - xs.min() + 1) * (ys.max() - ys.min() + 1)
        if area / box_area < _FALLBACK_MIN_FILL:
            continue
        best = (xs, ys)
        best_area = area
    if best is None:
        raise QuadNotFoundError("no fiducials and no usable bright region")
    xs, ys = best
    pts = np.column_stack([xs, ys]).astype(np.float64) + 0.5
    sums = pts[:, 0] + pts[:, 1]
    diffs = pts[:, 0] - pts[:, 1]
    quad = np.array(
        [
            pts[int(np.argmin(sums))],
            pts[int(np.argmax(diffs))],
            pts[int(np.argmax(sums))],
            pts[int(np.argmin(diffs))],
        ]
    )
    if not _is_convex(quad):
        raise QuadNotFoundError("fallback region corners are not convex")
    return quad


def detect_display_quad(image: np.ndarray, layout: PlaybackLayout | None = None) -> DisplayQuad:
    """Locate the displayed canvas; corners and anchors ordered TL,TR,BR,BL.

    Primary path: the four nested-square fiducials (anchors = their canvas
    centers).  Gated fallback: the largest solid bright quadrilateral
    (anchors = canvas corners), for recordings that crop the markers.
    """
    layout = layout or PlaybackLayout()
    if image.ndim != 3 or image.shape[2] != 3:
        raise QuadNotFoundError(f"expected an RGB image, got shape {image.shape}")
    gray = _gray(image)

    centers = _fiducial_candidates(gray)
    if len(centers) >= 4:
        quad = _order_corners(np.asarray(centers, dtype=np.float64))
        if _is_convex(quad):
            anchors = np.asarray(layout.fiducial_centers, dtype=np.float64)
            return DisplayQuad(corners=quad, anchors=anchors, method="fiducial")

    width, height = layout.canvas_size
    quad = _fallback_bright_quad(gray)
    anchors = np.array(
        [[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]]
    )
    return DisplayQuad(corners=quad, anchors=anchors, method="bright_quad")


def decode_frame_index(canvas: np.ndarray, layout: PlaybackLayout | None = None) -> int:
    """Read the marker strip from a rectified canvas; checksum-verified."""
    layout = layout or PlaybackLayout()
    width, height = layout.canvas_size
    if canvas.shape[:2] != (height, width):
        raise IndexUndecodableError(
            f"canvas shape {canvas.shape[:2]} does not match layout {height, width}"
        )
    gray = _gray(canvas)
    bits = []
    window = 5
    for cx, cy in layout.strip_cell_centers():
        x = int(cx)
        y = int(cy)
        patch = gray[y - window : y + window + 1, x - window : x + window + 1]
        bits.append(1 if float(patch.mean()) >= 128.0 else 0)
    return decode_index_bits(bits)


def transfer_bbox(
    bbox: tuple[int, int, int, int], layout: PlaybackLayout | None = None
) -> tuple[int, int, int, int]:
    """Shift a synthetic-frame bbox into rectified-canvas coordinates.

    With the embed at native size the rescale factor is 1 and the transfer
    is the pure offset of the embed rectangle.
    """
    layout = layout or PlaybackLayout()
    ex, ey, _, _ = layout.embed_rect
    scale = layout.embed_scale
    x, y, w, h = bbox
    return (
        int(round(ex + x * scale)),
        int(round(ey + y * scale)),
        int(round(w * scale)),
        int(round(h * scale)),
    )


def _transfer_corners(corners, layout: PlaybackLayout) -> tuple[tuple[float, float], ...]:
    ex, ey, _, _ = layout.embed_rect
    scale = layout.embed_scale
    return tuple((ex + x * scale, ey + y * scale) for x, y in corners)


def process_recorded_sequence(
    recorded_frames,
    source: SequenceAnnotation,
    layout: PlaybackLayout | None = None,
) -> tuple[SequenceAnnotation, list[RectifyOutcome]]:
    """Rectify recorded frames and transfer annotations from the source.

    Returns the partly-real sequence annotation (ok frames only, sorted by
    decoded index) and one outcome per recorded frame in input order.
    Frames failing any stage are skipped; an annotation is only ever
    emitted for a successfully decoded frame index (and the first
    recording of an index wins if duplicates occur).
    """
    layout = layout or PlaybackLayout()
    source_by_index = {frame.frame_index: frame for frame in source.frames}
    outcomes: list[RectifyOutcome] = []
    annotated: dict[int, FrameAnnotation] = {}

    for image in recorded_frames:
        try:
            quad = detect_display_quad(image, layout)
            homography = estimate_homography(quad.anchors, quad.corners)
            canvas = rectify(image, homography, layout.canvas_size)
            index = decode_frame_index(canvas, layout)
            source_frame = source_by_index.get(index)
            if source_frame is None:
                raise IndexUndecodableError(
                    f"decoded index {index} has no source annotation"
                )
            if index in annotated:
                raise IndexUndecodableError(
                    f"decoded index {index} already produced by an earlier frame"
                )
        except RectifyError as exc:
            outcomes.append(RectifyOutcome(status=exc.status, detail=str(exc)))
            continue

        bbox = transfer_bbox(source_frame.bbox, layout)
        annotated[index] = FrameAnnotation(
            frame_index=index,
            label=source_frame.label,
            bbox=bbox,
            corners=_transfer_corners(source_frame.corners, layout),
            occluded=source_frame.occluded,
            occlusion_sides=source_frame.occlusion_sides,
        )
        outcomes.append(
            RectifyOutcome(
                status=STATUS_OK, rectified=canvas, frame_index=index, bbox=bbox
            )
        )

    annotation = SequenceAnnotation(
        render_engine=source.render_engine,
        resolution=layout.canvas_size,
        camera=source.camera,
        light=source.light,
        frames=tuple(annotated[i] for i in sorted(annotated)),
    )
    return annotation, outcomes
