"""Plate layout and texture synthesis."""

import numpy as np
import pytest

from platesynth.errors import AssetError
from platesynth.plates import PlateString, parse_label
from platesynth.textures import (
    BAND_COLOR,
    CAR_TEXTURE_SIZE,
    CHAR_SPACING_MM,
    PlateGeometry,
    generate_car_rear_texture,
    layout_plate,
    rasterize_plate_texture,
)


def test_layout_box_count_and_bounds():
    for label in ("B-AB123", "ABC-XY1234", "M-A1"):
        plate = parse_label(label)
        geometry = layout_plate(plate)
        assert len(geometry.glyph_boxes) == len(plate.chars)
        for box in geometry.glyph_boxes:
            assert 46.0 <= box.x0 < box.x1 <= 506.0
            assert box.y0 == 17.5 and box.y1 == 92.5


def test_layout_is_horizontally_centered():
    geometry = layout_plate(parse_label("AB-CD12"))
    first = geometry.glyph_boxes[0]
    last = geometry.glyph_boxes[-1]
    left_gap = first.x0 - 56.0
    right_gap = 506.0 - last.x1
    assert abs(left_gap - right_gap) < 1e-9


def test_layout_block_gaps():
    plate = parse_label("AB-CD12")
    geometry = layout_plate(plate)
    xs = geometry.glyph_boxes
    gaps = [round(b.x0 - a.x1, 6) for a, b in zip(xs[:-1], xs[1:])]
    # A B | C D | 1 2 with block gaps after the region and middle groups.
    assert gaps == [6.0, 14.0, 6.0, 14.0, 6.0]


def test_widest_legal_row_fits():
    geometry = layout_plate(PlateString("ABC", "XY", "1234"))
    row = geometry.glyph_boxes
    width = row[-1].x1 - row[0].x0
    assert width == 9 * 40.0 + 6 * CHAR_SPACING_MM + 2 * 14.0
    assert row[0].x0 >= 56.0


def test_texture_ink_matches_atlas_exactly(atlas):
    """At the atlas's native density every blit is 1:1, so ink coverage
    must equal the atlas masks texel for texel."""
    plate = parse_label("B-AB123")
    geometry = layout_plate(plate)
    texture = rasterize_plate_texture(plate, geometry, 4.0, atlas)
    ink = np.all(texture < 0.5, axis=2)
    expected = sum(int(atlas.glyph(ch).sum()) for ch in plate.chars)
    observed = 0
    for box, char in zip(geometry.glyph_boxes, plate.chars):
        y0, y1 = round(box.y0 * 4), round(box.y1 * 4)
        x0, x1 = round(box.x0 * 4), round(box.x1 * 4)
        cell = ink[y0:y1, x0:x1]
        assert np.array_equal(cell, atlas.glyph(char)), char
        observed += int(cell.sum())
    assert observed == expected


def test_texture_has_band_frame_and_background(atlas):
    plate = parse_label("B-AB123")
    texture = rasterize_plate_texture(plate, layout_plate(plate), 4.0, atlas)
    assert texture.shape == (110 * 4, 520 * 4, 3)
    # frame border is dark
    assert np.all(texture[0, :, :] < 0.2)
    # band interior is the registration blue
    band = texture[round(50 * 4), round(25 * 4)]
    assert np.allclose(band, BAND_COLOR, atol=1e-9)
    # background is white away from all features
    assert np.allclose(texture[round(10 * 4), round(260 * 4)], (1.0, 1.0, 1.0))


def test_empty_geometry_renders_blank_plate(atlas):
    plate = parse_label("B-AB123")
    geometry = PlateGeometry(glyph_boxes=())
    texture = rasterize_plate_texture(plate, geometry, 4.0, atlas)
    interior = texture[40 * 4 : 70 * 4, 200 * 4 : 500 * 4]
    assert np.allclose(interior, 1.0)


def test_texture_box_char_mismatch_rejected(atlas):
    plate = parse_label("B-AB123")
    geometry = layout_plate(parse_label("ABC-XY1234"))
    with pytest.raises(AssetError):
        rasterize_plate_texture(plate, geometry, 4.0, atlas)


def test_car_texture_deterministic():
    a = generate_car_rear_texture(42)
    b = generate_car_rear_texture(42)
    assert np.array_equal(a, b)
    assert a.shape == (CAR_TEXTURE_SIZE[1], CAR_TEXTURE_SIZE[0], 3)


def test_car_textures_differ_across_seeds():
    a = generate_car_rear_texture(1)
    b = generate_car_rear_texture(2)
    differing = np.mean(np.any(a != b, axis=2))
    assert differing >= 0.01


def test_car_texture_statistics():
    texture = generate_car_rear_texture(7)
    assert texture.min() >= 0.0 and texture.max() <= 1.0
    for channel in range(3):
        plane = texture[:, :, channel]
        assert abs(plane.mean() - 0.5) < 0.05
        assert 0.06 < plane.std() < 0.18


def test_car_texture_spectrum_is_low_pass():
    """Smoothing must push nearly all energy below half Nyquist (0.25/px)."""
    texture = generate_car_rear_texture(3)
    plane = texture[:, :, 0] - texture[:, :, 0].mean()
    spectrum = np.abs(np.fft.fft2(plane)) ** 2
    h, w = plane.shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    high = (np.abs(fy) > 0.25) | (np.abs(fx) > 0.25)
    assert spectrum[high].sum() < 0.10 * spectrum.sum()
