"""Procedural stroke font and the glyph atlas asset.

Plate glyphs are bitmap masks stored in an atlas file checked into the
package (``assets/glyph_atlas.npz``).  The atlas is generated procedurally
from the polyline skeletons below (see ``tools/make_atlas.py``): each glyph
is the set of texels within half a stroke width of its skeleton, rendered
into a cell of 40 mm x 75 mm at 4 texels/mm.  The font is a plain
technical single-stroke face; glyph cell metrics, not letterform fidelity,
are the contract.

Skeleton coordinates live in a unit cell: x in [0, 1] left to right,
y in [0, 1] top to bottom.  Strokes are inset by half the stroke width
when rasterized so nothing clips at cell borders.

Atlas container format (npz):

* ``meta``: JSON string with {"format": "platesynth-atlas", "version": 1,
  "texel_density": texels/mm, "glyph_width_mm": w, "glyph_height_mm": h,
  "stroke_fraction": f}
* ``mask_<CH>``: uint8 array (rows, cols), 0 or 1, one per glyph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import AssetError

ATLAS_FORMAT = "platesynth-atlas"
ATLAS_VERSION = 1

GLYPH_WIDTH_MM = 40.0
GLYPH_HEIGHT_MM = 75.0
ATLAS_TEXEL_DENSITY = 4.0
# Stroke width as a fraction of glyph height: ~10 mm on a 75 mm glyph,
# matching narrow plate typefaces.
STROKE_FRACTION = 0.13
CELL_ASPECT = GLYPH_WIDTH_MM / GLYPH_HEIGHT_MM

PLATE_CHARSET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"

# fmt: off
STROKES: dict[str, tuple[tuple[tuple[float, float], ...], ...]] = {
    "A": (((0.0, 1.0), (0.0, 0.3), (0.5, 0.0), (1.0, 0.3), (1.0, 1.0)), ((0.0, 0.6), (1.0, 0.6))),
    "B": (((0.0, 0.0), (0.0, 1.0)), ((0.0, 0.0), (0.75, 0.0), (1.0, 0.12), (1.0, 0.36), (0.75, 0.48), (0.0, 0.48)), ((0.75, 0.48), (1.0, 0.62), (1.0, 0.87), (0.75, 1.0), (0.0, 1.0))),
    "C": (((1.0, 0.14), (0.72, 0.0), (0.3, 0.0), (0.0, 0.18), (0.0, 0.82), (0.3, 1.0), (0.72, 1.0), (1.0, 0.86)),),
    "D": (((0.0, 0.0), (0.0, 1.0)), ((0.0, 0.0), (0.62, 0.0), (1.0, 0.26), (1.0, 0.74), (0.62, 1.0), (0.0, 1.0))),
    "E": (((1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 1.0)), ((0.0, 0.5), (0.8, 0.5))),
    "F": (((1.0, 0.0), (0.0, 0.0), (0.0, 1.0)), ((0.0, 0.5), (0.8, 0.5))),
    "G": (((1.0, 0.14), (0.72, 0.0), (0.3, 0.0), (0.0, 0.18), (0.0, 0.82), (0.3, 1.0), (0.72, 1.0), (1.0, 0.8), (1.0, 0.55), (0.55, 0.55)),),
    "H": (((0.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (1.0, 1.0)), ((0.0, 0.5), (1.0, 0.5))),
    "I": (((0.25, 0.0), (0.75, 0.0)), ((0.5, 0.0), (0.5, 1.0)), ((0.25, 1.0), (0.75, 1.0))),
    "J": (((1.0, 0.0), (1.0, 0.8), (0.7, 1.0), (0.3, 1.0), (0.0, 0.85)),),
    "K": (((0.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (0.0, 0.52), (1.0, 1.0))),
    "L": (((0.0, 0.0), (0.0, 1.0), (1.0, 1.0)),),
    "M": (((0.0, 1.0), (0.0, 0.0), (0.5, 0.55), (1.0, 0.0), (1.0, 1.0)),),
    "N": (((0.0, 1.0), (0.0, 0.0), (1.0, 1.0), (1.0, 0.0)),),
    "O": (((0.3, 0.0), (0.7, 0.0), (1.0, 0.2), (1.0, 0.8), (0.7, 1.0), (0.3, 1.0), (0.0, 0.8), (0.0, 0.2), (0.3, 0.0)),),
    "P": (((0.0, 1.0), (0.0, 0.0), (0.75, 0.0), (1.0, 0.14), (1.0, 0.4), (0.75, 0.54), (0.0, 0.54)),),
    "Q": (((0.3, 0.0), (0.7, 0.0), (1.0, 0.2), (1.0, 0.8), (0.7, 1.0), (0.3, 1.0), (0.0, 0.8), (0.0, 0.2), (0.3, 0.0)), ((0.58, 0.68), (1.0, 1.0))),
    "R": (((0.0, 1.0), (0.0, 0.0), (0.75, 0.0), (1.0, 0.14), (1.0, 0.4), (0.75, 0.54), (0.0, 0.54)), ((0.5, 0.54), (1.0, 1.0))),
    "S": (((1.0, 0.14), (0.7, 0.0), (0.3, 0.0), (0.0, 0.13), (0.0, 0.36), (0.3, 0.5), (0.7, 0.5), (1.0, 0.64), (1.0, 0.87), (0.7, 1.0), (0.3, 1.0), (0.0, 0.86)),),
    "T": (((0.0, 0.0), (1.0, 0.0)), ((0.5, 0.0), (0.5, 1.0))),
    "U": (((0.0, 0.0), (0.0, 0.8), (0.3, 1.0), (0.7, 1.0), (1.0, 0.8), (1.0, 0.0)),),
    "V": (((0.0, 0.0), (0.5, 1.0), (1.0, 0.0)),),
    "W": (((0.0, 0.0), (0.25, 1.0), (0.5, 0.45), (0.75, 1.0), (1.0, 0.0)),),
    "X": (((0.0, 0.0), (1.0, 1.0)), ((1.0, 0.0), (0.0, 1.0))),
    "Y": (((0.0, 0.0), (0.5, 0.45), (1.0, 0.0)), ((0.5, 0.45), (0.5, 1.0))),
    "Z": (((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)),),
    "0": (((0.3, 0.0), (0.7, 0.0), (1.0, 0.2), (1.0, 0.8), (0.7, 1.0), (0.3, 1.0), (0.0, 0.8), (0.0, 0.2), (0.3, 0.0)), ((0.82, 0.2), (0.18, 0.8))),
    "1": (((0.15, 0.25), (0.5, 0.0), (0.5, 1.0)), ((0.15, 1.0), (0.85, 1.0))),
    "2": (((0.0, 0.18), (0.3, 0.0), (0.7, 0.0), (1.0, 0.18), (1.0, 0.4), (0.0, 1.0), (1.0, 1.0)),),
    "3": (((0.0, 0.12), (0.3, 0.0), (0.7, 0.0), (1.0, 0.14), (1.0, 0.36), (0.7, 0.5), (0.4, 0.5)), ((0.7, 0.5), (1.0, 0.64), (1.0, 0.86), (0.7, 1.0), (0.3, 1.0), (0.0, 0.88))),
    "4": (((0.78, 1.0), (0.78, 0.0), (0.0, 0.68), (1.0, 0.68)),),
    "5": (((1.0, 0.0), (0.0, 0.0), (0.0, 0.44), (0.6, 0.44), (1.0, 0.6), (1.0, 0.84), (0.7, 1.0), (0.3, 1.0), (0.0, 0.88)),),
    "6": (((0.9, 0.1), (0.62, 0.0), (0.3, 0.0), (0.0, 0.24), (0.0, 0.8), (0.3, 1.0), (0.7, 1.0), (1.0, 0.8), (1.0, 0.6), (0.7, 0.46), (0.0, 0.52)),),
    "7": (((0.0, 0.0), (1.0, 0.0), (0.4, 1.0)),),
    "8": (((0.3, 0.0), (0.7, 0.0), (1.0, 0.14), (1.0, 0.36), (0.7, 0.5), (0.3, 0.5), (0.0, 0.36), (0.0, 0.14), (0.3, 0.0)), ((0.3, 0.5), (0.7, 0.5), (1.0, 0.64), (1.0, 0.86), (0.7, 1.0), (0.3, 1.0), (0.0, 0.86), (0.0, 0.64), (0.3, 0.5))),
    "9": (((0.1, 0.9), (0.38, 1.0), (0.7, 1.0), (1.0, 0.76), (1.0, 0.2), (0.7, 0.0), (0.3, 0.0), (0.0, 0.2), (0.0, 0.4), (0.3, 0.54), (1.0, 0.48)),),
    "-": (((0.12, 0.5), (0.88, 0.5)),),
}
# fmt: on


def render_glyph_mask(
    char: str,
    width_px: int,
    height_px: int,
    stroke_fraction: float = STROKE_FRACTION,
) -> np.ndarray:
    """Rasterize one glyph skeleton to a boolean mask of the given size.

    A texel is set when its center lies within half a stroke width of any
    skeleton segment.  Stroke width = stroke_fraction * height_px.
    """
    strokes = STROKES.get(char)
    if strokes is None:
        raise AssetError(f"character {char!r} has no glyph skeleton")
    if width_px <= 0 or height_px <= 0:
        raise AssetError(f"glyph size must be positive, got {width_px}x{height_px}")

    stroke_width = stroke_fraction * height_px
    half = stroke_width / 2.0
    # Inset the unit cell so strokes at the borders keep their full width.
    span_x = width_px - stroke_width
    span_y = height_px - stroke_width

    ys, xs = np.meshgrid(
        np.arange(height_px, dtype=np.float64) + 0.5,
        np.arange(width_px, dtype=np.float64) + 0.5,
        indexing="ij",
    )
    mask = np.zeros((height_px, width_px), dtype=bool)
    half_sq = half * half
    for polyline in strokes:
        points = [(half + x * span_x, half + y * span_y) for x, y in polyline]
        for (ax, ay), (bx, by) in zip(points[:-1], points[1:]):
            ex, ey = bx - ax, by - ay
            length_sq = ex * ex + ey * ey
            if length_sq == 0.0:
                dist_sq = (xs - ax) ** 2 + (ys - ay) ** 2
            else:
                t = np.clip(((xs - ax) * ex + (ys - ay) * ey) / length_sq, 0.0, 1.0)
                dist_sq = (xs - (ax + t * ex)) ** 2 + (ys - (ay + t * ey)) ** 2
            mask |= dist_sq <= half_sq
    return mask


def render_text_mask(text: str, height_px: int, spacing_fraction: float = 0.2) -> np.ndarray:
    """Rasterize a text string to one boolean mask at a uniform cap height.

    Supports the plate charset plus '-'.  Characters keep the plate glyph
    cell aspect; spacing is a fraction of the glyph width.
    """
    if not text:
        raise AssetError("cannot render empty text")
    glyph_w = max(1, round(height_px * CELL_ASPECT))
    spacing = max(1, round(glyph_w * spacing_fraction))
    glyphs = [render_glyph_mask(ch, glyph_w, height_px) for ch in text]
    total_w = glyph_w * len(glyphs) + spacing * (len(glyphs) - 1)
    mask = np.zeros((height_px, total_w), dtype=bool)
    x = 0
    for glyph in glyphs:
        mask[:, x : x + glyph_w] |= glyph
        x += glyph_w + spacing
    return mask


@dataclass(frozen=True)
class GlyphAtlas:
    """Per-character bitmap masks with physical metrics."""

    masks: dict[str, np.ndarray]
    texel_density: float
    glyph_width_mm: float
    glyph_height_mm: float

    def glyph(self, char: str) -> np.ndarray:
        mask = self.masks.get(char)
        if mask is None:
            raise AssetError(f"glyph {char!r} missing from atlas")
        return mask

    @property
    def charset(self) -> str:
        return "".join(sorted(self.masks))


def build_atlas(
    charset: str = PLATE_CHARSET,
    texel_density: float = ATLAS_TEXEL_DENSITY,
    glyph_width_mm: float = GLYPH_WIDTH_MM,
    glyph_height_mm: float = GLYPH_HEIGHT_MM,
) -> GlyphAtlas:
    """Rasterize the skeleton font into a fresh atlas."""
    width_px = round(glyph_width_mm * texel_density)
    height_px = round(glyph_height_mm * texel_density)
    masks = {ch: render_glyph_mask(ch, width_px, height_px) for ch in charset}
    return GlyphAtlas(
        masks=masks,
        texel_density=texel_density,
        glyph_width_mm=glyph_width_mm,
        glyph_height_mm=glyph_height_mm,
    )


def save_atlas(atlas: GlyphAtlas, path) -> None:
    meta = json.dumps(
        {
            "format": ATLAS_FORMAT,
            "version": ATLAS_VERSION,
            "texel_density": atlas.texel_density,
            "glyph_width_mm": atlas.glyph_width_mm,
            "glyph_height_mm": atlas.glyph_height_mm,
            "stroke_fraction": STROKE_FRACTION,
        },
        sort_keys=True,
    )
    arrays = {f"mask_{ch}": mask.astype(np.uint8) for ch, mask in atlas.masks.items()}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(meta), **arrays)


def load_atlas(path) -> GlyphAtlas:
    try:
        with np.load(path) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("format") != ATLAS_FORMAT or meta.get("version") != ATLAS_VERSION:
                raise AssetError(f"unsupported atlas metadata: {meta}")
            masks = {
                name[len("mask_") :]: data[name].astype(bool)
                for name in data.files
                if name.startswith("mask_")
            }
    except (OSError, KeyError, ValueError) as exc:
        raise AssetError(f"cannot load glyph atlas from {path}: {exc}") from exc
    if not masks:
        raise AssetError(f"atlas at {path} contains no glyph masks")
    return GlyphAtlas(
        masks=masks,
        texel_density=meta["texel_density"],
        glyph_width_mm=meta["glyph_width_mm"],
        glyph_height_mm=meta["glyph_height_mm"],
    )


_DEFAULT_ATLAS: GlyphAtlas | None = None


def default_atlas() -> GlyphAtlas:
    """The packaged atlas asset, loaded once per process."""
    global _DEFAULT_ATLAS
    if _DEFAULT_ATLAS is None:
        resource = resources.files("platesynth").joinpath("assets/glyph_atlas.npz")
        with resources.as_file(resource) as path:
            _DEFAULT_ATLAS = load_atlas(path)
    return _DEFAULT_ATLAS
