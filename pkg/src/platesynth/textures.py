"""Plate texture synthesis and the schematic car-rear texture.

Plate layout (millimeters, origin at the plate's top-left corner, x right,
y down):

* plate: 520 x 110
* mounting frame: 4 mm black border on all sides
* country band: solid blue column from x = 4 to 46, full inner height
* glyph row: cells of 40 x 75 vertically centered (y = 17.5), 6 mm between
  characters inside a block, 14 mm between blocks, the whole row centered
  in the usable area between band and right frame

All layout values are integral multiples of 0.25 mm, so at the atlas
density of 4 texels/mm every glyph blit is an exact 1:1 mask copy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AssetError, ConfigError
from .glyphs import GlyphAtlas, default_atlas
from .plates import PlateString
from .prng import stream_floats

PLATE_WIDTH_M = 0.52
PLATE_HEIGHT_M = 0.11
FRAME_MM = 4.0
BAND_X0_MM = 4.0
BAND_X1_MM = 46.0
GLYPH_WIDTH_MM = 40.0
GLYPH_HEIGHT_MM = 75.0
CHAR_SPACING_MM = 6.0
BLOCK_GAP_MM = 14.0

PLATE_BACKGROUND = (1.0, 1.0, 1.0)
GLYPH_COLOR = (0.0, 0.0, 0.0)
BAND_COLOR = (0.0, 0.2, 0.6)
FRAME_COLOR = (0.0, 0.0, 0.0)

CAR_TEXTURE_SIZE = (340, 220)
CAR_NOISE_SIGMA = 8.0
CAR_NOISE_STD = 0.12


@dataclass(frozen=True)
class GlyphBox:
    """One character cell in plate-local millimeters."""

    char: str
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ConfigError(f"glyph box for {self.char!r} is empty or inverted")


@dataclass(frozen=True)
class PlateGeometry:
    """Physical plate dimensions plus the per-character layout."""

    glyph_boxes: tuple[GlyphBox, ...]
    width_m: float = PLATE_WIDTH_M
    height_m: float = PLATE_HEIGHT_M
    frame_mm: float = FRAME_MM
    band_rect_mm: tuple[float, float, float, float] = (
        BAND_X0_MM,
        FRAME_MM,
        BAND_X1_MM,
        PLATE_HEIGHT_M * 1000.0 - FRAME_MM,
    )

    def __post_init__(self) -> None:
        width_mm = self.width_m * 1000.0
        height_mm = self.height_m * 1000.0
        for box in self.glyph_boxes:
            if box.x0 < 0 or box.y0 < 0 or box.x1 > width_mm or box.y1 > height_mm:
                raise ConfigError(f"glyph box for {box.char!r} outside the plate rectangle")
        boxes = sorted(self.glyph_boxes, key=lambda b: b.x0)
        for left, right in zip(boxes[:-1], boxes[1:]):
            if right.x0 < left.x1 and left.y0 < right.y1 and right.y0 < left.y1:
                raise ConfigError(
                    f"glyph boxes for {left.char!r} and {right.char!r} overlap"
                )


def layout_plate(plate: PlateString) -> PlateGeometry:
    """Compute the glyph row for a plate string.

    Width used: cells 40 mm, 6 mm intra-block spacing, 14 mm gaps after the
    region and middle blocks, centered in the usable area.
    """
    chars = plate.chars
    n = len(chars)
    gaps = n - 1
    block_gaps = 2
    row_width = (
        n * GLYPH_WIDTH_MM
        + (gaps - block_gaps) * CHAR_SPACING_MM
        + block_gaps * BLOCK_GAP_MM
    )
    usable_x0 = BAND_X1_MM + 2.0 * CHAR_SPACING_MM
    usable_x1 = PLATE_WIDTH_M * 1000.0 - FRAME_MM - 2.0 * CHAR_SPACING_MM
    if row_width > usable_x1 - usable_x0:
        raise ConfigError(f"plate {plate.label!r} does not fit the glyph row")
    x = usable_x0 + (usable_x1 - usable_x0 - row_width) / 2.0
    y0 = (PLATE_HEIGHT_M * 1000.0 - GLYPH_HEIGHT_MM) / 2.0
    y1 = y0 + GLYPH_HEIGHT_MM

    boundaries = {len(plate.region), len(plate.region) + len(plate.middle)}
    boxes = []
    for index, char in enumerate(chars):
        boxes.append(GlyphBox(char, x, y0, x + GLYPH_WIDTH_MM, y1))
        x += GLYPH_WIDTH_MM
        if index + 1 < n:
            x += BLOCK_GAP_MM if (index + 1) in boundaries else CHAR_SPACING_MM
    return PlateGeometry(glyph_boxes=tuple(boxes))


def _resample_mask(mask: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of a float mask via the shared warp kernel."""
    in_h, in_w = mask.shape
    scale = np.array(
        [
            [in_w / out_w, 0.0, 0.0],
            [0.0, in_h / out_h, 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    src = mask.astype(np.float64)[:, :, None]
    return kernels.warp_perspective(src, scale, (out_w, out_h))[:, :, 0]


def rasterize_plate_texture(
    plate: PlateString,
    geometry: PlateGeometry,
    texel_density: float,
    atlas: GlyphAtlas | None = None,
) -> np.ndarray:
    """Render the plate face to an RGB float64 texture in [0, 1].

    Texture size = plate dimensions x density.  Glyph masks are copied 1:1
    when a box matches the atlas raster exactly (the default layout at the
    atlas density), otherwise resampled bilinearly.
    """
    if texel_density <= 0:
        raise ConfigError(f"texel density must be positive, got {texel_density}")
    atlas = atlas or default_atlas()
    chars = plate.chars
    if geometry.glyph_boxes and len(geometry.glyph_boxes) != len(chars):
        raise AssetError(
            f"geometry has {len(geometry.glyph_boxes)} glyph boxes "
            f"for {len(chars)} characters"
        )

    width_mm = geometry.width_m * 1000.0
    height_mm = geometry.height_m * 1000.0
    tex_w = round(width_mm * texel_density)
    tex_h = round(height_mm * texel_density)
    img = np.empty((tex_h, tex_w, 3), dtype=np.float64)
    img[:] = PLATE_BACKGROUND

    def to_px(mm: float) -> int:
        return round(mm * texel_density)

    frame = to_px(geometry.frame_mm)
    if frame > 0:
        img[:frame, :] = FRAME_COLOR
        img[-frame:, :] = FRAME_COLOR
        img[:, :frame] = FRAME_COLOR
        img[:, -frame:] = FRAME_COLOR

    bx0, by0, bx1, by1 = geometry.band_rect_mm
    img[to_px(by0) : to_px(by1), to_px(bx0) : to_px(bx1)] = BAND_COLOR

    glyph_color = np.array(GLYPH_COLOR)
    for box in geometry.glyph_boxes:
        mask = atlas.glyph(box.char)
        px0, py0 = to_px(box.x0), to_px(box.y0)
        px1, py1 = to_px(box.x1), to_px(box.y1)
        box_h, box_w = py1 - py0, px1 - px0
        if mask.shape == (box_h, box_w):
            weight = mask.astype(np.float64)
        else:
            weight = _resample_mask(mask.astype(np.float64), box_h, box_w)
        cell = img[py0:py1, px0:px1]
        img[py0:py1, px0:px1] = cell * (1.0 - weight[:, :, None]) + glyph_color * weight[:, :, None]
    return img


def generate_car_rear_texture(seed: int, size: tuple[int, int] = CAR_TEXTURE_SIZE) -> np.ndarray:
    """Colored lowpass noise: white noise blurred, restandardized per channel.

    Per-channel uniform noise is blurred with a Gaussian of sigma
    CAR_NOISE_SIGMA texels, then each channel is affinely mapped to mean
    0.5 and standard deviation CAR_NOISE_STD and clipped to [0, 1].
    Deterministic in ``seed``.
    """
    width, height = size
    if width <= 0 or height <= 0:
        raise ConfigError(f"texture size must be positive, got {size}")
    noise = stream_floats(seed, height * width * 3).reshape(height, width, 3)
    lowpass = kernels.separable_blur(noise, kernels.gaussian_weights(CAR_NOISE_SIGMA))
    out = np.empty_like(lowpass)
    for c in range(3):
        channel = lowpass[:, :, c]
        std = channel.std()
        if std == 0.0:
            out[:, :, c] = 0.5
        else:
            out[:, :, c] = 0.5 + (channel - channel.mean()) / std * CAR_NOISE_STD
    return np.clip(out, 0.0, 1.0)
