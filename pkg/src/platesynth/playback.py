"""Playback canvas composition for partly-real acquisition.

A rendered 1920x1080 frame is embedded centered in a 3840x2160 uniform
gray canvas together with machine-decodable registration aids:

* four nested-square fiducials (black/white/black) near the canvas
  corners, used to locate the display and estimate the homography;
* a horizontal binary marker strip encoding the frame index with framing
  bits and a nibble-XOR checksum, used to decode the index without OCR;
* human-readable frame-index digits left of the embed and the label text
  below it (drawn for visual fidelity; decoding never reads them).

All geometry constants live in ``PlaybackLayout`` (the table in
``docs/playback_layout.md`` documents them) and are validated to be
mutually disjoint.  Composition is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IndexUndecodableError
from .glyphs import render_text_mask

STRIP_CELLS = 32
STRIP_DATA_BITS = 24
_STRIP_START = (1, 0)
_STRIP_END = (1, 0)

Rect = tuple[int, int, int, int]


@dataclass(frozen=True)
class PlaybackLayout:
    """Canvas geometry for playback composition (pixels).

    Rectangles are (x, y, w, h).  ``embed_scale`` is the factor between
    the embedded frame and its native resolution (1 = native size); bbox
    transfer multiplies by it.
    """

    canvas_size: tuple[int, int] = (3840, 2160)
    background_gray: int = 128
    embed_rect: Rect = (960, 540, 1920, 1080)
    fiducial_margin: int = 48
    fiducial_sizes: tuple[int, int, int] = (144, 96, 48)
    strip_origin: tuple[int, int] = (400, 40)
    strip_cell_size: tuple[int, int] = (95, 96)
    index_field: Rect = (150, 960, 660, 240)
    label_field: Rect = (1400, 1770, 1040, 240)
    text_height: int = 120

    def __post_init__(self) -> None:
        if self.embed_rect[2:] != (1920, 1080):
            raise ConfigError(f"embed size must be 1920x1080, got {self.embed_rect}")
        sizes = self.fiducial_sizes
        if not (sizes[0] > sizes[1] > sizes[2] > 0):
            raise ConfigError(f"fiducial sizes must strictly nest, got {sizes}")
        rects = [self.embed_rect, self.strip_rect, self.index_field, self.label_field]
        rects += list(self.fiducial_rects)
        names = ["embed", "strip", "index_field", "label_field", "fid_tl", "fid_tr", "fid_br", "fid_bl"]
        width, height = self.canvas_size
        for name, (x, y, w, h) in zip(names, rects):
            if x < 0 or y < 0 or x + w > width or y + h > height:
                raise ConfigError(f"layout region {name} exceeds the canvas")
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if _rects_overlap(rects[i], rects[j]):
                    raise ConfigError(
                        f"layout regions {names[i]} and {names[j]} overlap"
                    )

    @property
    def embed_scale(self) -> float:
        return 1.0

    @property
    def strip_rect(self) -> Rect:
        cw, ch = self.strip_cell_size
        return (self.strip_origin[0], self.strip_origin[1], cw * STRIP_CELLS, ch)

    @property
    def fiducial_centers(self) -> tuple[tuple[float, float], ...]:
        """Fiducial centers in canvas pixels, ordered TL, TR, BR, BL."""
        width, height = self.canvas_size
        offset = self.fiducial_margin + self.fiducial_sizes[0] / 2.0
        return (
            (offset, offset),
            (width - offset, offset),
            (width - offset, height - offset),
            (offset, height - offset),
        )

    @property
    def fiducial_rects(self) -> tuple[Rect, ...]:
        size = self.fiducial_sizes[0]
        return tuple(
            (int(cx - size / 2), int(cy - size / 2), size, size)
            for cx, cy in self.fiducial_centers
        )

    def strip_cell_centers(self) -> tuple[tuple[float, float], ...]:
        cw, ch = self.strip_cell_size
        x0, y0 = self.strip_origin
        cy = y0 + ch / 2.0
        return tuple((x0 + (i + 0.5) * cw, cy) for i in range(STRIP_CELLS))


def _rects_overlap(a: Rect, b: Rect) -> bool:
    return a[0] < b[0] + b[2] and b[0] < a[0] + a[2] and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]


def _nibble_checksum(data_bits: tuple[int, ...]) -> tuple[int, ...]:
    """XOR of the six 4-bit nibbles of the 24 data bits, MSB first."""
    checksum = 0
    for start in range(0, STRIP_DATA_BITS, 4):
        nibble = 0
        for bit in data_bits[start : start + 4]:
            nibble = (nibble << 1) | bit
        checksum ^= nibble
    return tuple((checksum >> shift) & 1 for shift in (3, 2, 1, 0))


def encode_index_bits(frame_index: int) -> tuple[int, ...]:
    """The 32 marker-strip cells for a frame index: framing, data, checksum."""
    if not (0 <= frame_index < 2**STRIP_DATA_BITS):
        raise ConfigError(f"frame index {frame_index} outside 24-bit range")
    data = tuple((frame_index >> shift) & 1 for shift in range(STRIP_DATA_BITS - 1, -1, -1))
    return _STRIP_START + data + _nibble_checksum(data) + _STRIP_END


def decode_index_bits(bits) -> int:
    """Inverse of encode_index_bits; raises IndexUndecodableError."""
    bits = tuple(int(b) for b in bits)
    if len(bits) != STRIP_CELLS:
        raise IndexUndecodableError(f"expected {STRIP_CELLS} cells, got {len(bits)}")
    if bits[:2] != _STRIP_START or bits[-2:] != _STRIP_END:
        raise IndexUndecodableError("framing bits do not match")
    data = bits[2 : 2 + STRIP_DATA_BITS]
    checksum = bits[2 + STRIP_DATA_BITS : 2 + STRIP_DATA_BITS + 4]
    if _nibble_checksum(data) != checksum:
        raise IndexUndecodableError("checksum mismatch")
    value = 0
    for bit in data:
        value = (value << 1) | bit
    return value


def _draw_centered_square(canvas: np.ndarray, cx: float, cy: float, size: int, value: int) -> None:
    half = size // 2
    x0 = int(cx) - half
    y0 = int(cy) - half
    canvas[y0 : y0 + size, x0 : x0 + size] = value


def _blit_text(canvas: np.ndarray, text: str, rect: Rect, height: int, value: int) -> None:
    mask = render_text_mask(text, height)
    rx, ry, rw, rh = rect
    if mask.shape[1] > rw or mask.shape[0] > rh:
        raise ConfigError(f"text {text!r} does not fit its field {rect}")
    x0 = rx + (rw - mask.shape[1]) // 2
    y0 = ry + (rh - mask.shape[0]) // 2
    region = canvas[y0 : y0 + mask.shape[0], x0 : x0 + mask.shape[1]]
    region[mask] = value


def compose_playback_frame(
    frame_pixels: np.ndarray,
    frame_index: int,
    label: str,
    layout: PlaybackLayout | None = None,
) -> np.ndarray:
    """Compose the 4K playback canvas for one rendered frame."""
    layout = layout or PlaybackLayout()
    ex, ey, ew, eh = layout.embed_rect
    if frame_pixels.shape[:2] != (eh, ew) or frame_pixels.ndim != 3:
        raise ConfigError(
            f"embedded frame must be {ew}x{eh} RGB, got shape {frame_pixels.shape}"
        )
    width, height = layout.canvas_size
    canvas = np.full((height, width, 3), layout.background_gray, dtype=np.uint8)
    canvas[ey : ey + eh, ex : ex + ew] = frame_pixels

    for cx, cy in layout.fiducial_centers:
        for size, value in zip(layout.fiducial_sizes, (0, 255, 0)):
            _draw_centered_square(canvas, cx, cy, size, value)

    cw, ch = layout.strip_cell_size
    sx, sy = layout.strip_origin
    for cell, bit in enumerate(encode_index_bits(frame_index)):
        value = 255 if bit else 0
        canvas[sy : sy + ch, sx + cell * cw : sx + (cell + 1) * cw] = value

    _blit_text(canvas, str(frame_index), layout.index_field, layout.text_height, 0)
    _blit_text(canvas, label, layout.label_field, layout.text_height, 0)
    return canvas
