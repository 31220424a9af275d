"""Minimal rotated rectangle, deskew warp, and the sample manifest."""

from __future__ import annotations

import math

import numpy as np
import pytest

from platesynth.annotations import FrameAnnotation
from platesynth.errors import ConfigError, GeometryError
from platesynth.prep import (
    H_OUT_DEFAULT,
    PreppedSample,
    SampleProvenance,
    bbox_corners,
    deskew_crop,
    deskew_matrix,
    min_area_rect,
    prep_frame,
    read_manifest,
    write_manifest,
)


def _rect_corners(center, size, angle_deg):
    """Corners of a rotated rectangle, for building fixtures."""
    cx, cy = center
    w, h = size
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    half = [(-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)]
    return np.array(
        [(cx + x * cos_t - y * sin_t, cy + x * sin_t + y * cos_t) for x, y in half]
    )


def _sweep_min_area(points, step_deg=0.02):
    """Brute-force reference: smallest bounding-box area over angle sweep.

    The sweep can only overshoot the true minimum (it tests a grid of
    angles), by at most the area change across one step.
    """
    thetas = np.radians(np.arange(0.0, 90.0, step_deg))
    cos_t = np.cos(thetas)[:, None]
    sin_t = np.sin(thetas)[:, None]
    xs = cos_t * points[:, 0] + sin_t * points[:, 1]
    ys = -sin_t * points[:, 0] + cos_t * points[:, 1]
    areas = (xs.max(axis=1) - xs.min(axis=1)) * (ys.max(axis=1) - ys.min(axis=1))
    return float(areas.min())


def test_axis_aligned_square_fixture():
    rect = min_area_rect([(0, 0), (10, 0), (10, 10), (0, 10)])
    assert rect.center == pytest.approx((5.0, 5.0))
    assert sorted(rect.size) == pytest.approx([10.0, 10.0])
    assert rect.angle_deg == pytest.approx(0.0, abs=1e-12)
    assert rect.area == pytest.approx(100.0)


@pytest.mark.parametrize("angle", [0.0, 7.5, 30.0, 45.0, 62.0, 89.0])
def test_rotated_rect_fixtures_recovered(angle):
    corners = _rect_corners((40.0, 25.0), (30.0, 12.0), angle)
    rect = min_area_rect(corners)
    assert rect.center == pytest.approx((40.0, 25.0), abs=1e-9)
    assert sorted(rect.size) == pytest.approx([12.0, 30.0], abs=1e-9)
    assert 0.0 <= rect.angle_deg < 90.0
    assert rect.area == pytest.approx(360.0, abs=1e-9)
    # The recovered direction matches the constructed one modulo 90.
    assert min(
        abs(rect.angle_deg - angle % 90), 90 - abs(rect.angle_deg - angle % 90)
    ) == pytest.approx(0.0, abs=1e-9)


def test_min_area_matches_angle_sweep_oracle(rng):
    for _ in range(25):
        points = rng.uniform(0, 100, size=(6, 2))
        rect = min_area_rect(points)
        reference = _sweep_min_area(points)
        # Calipers is exact, the sweep can only land above the optimum.
        assert rect.area <= reference * (1 + 1e-9)
        assert rect.area >= reference * (1 - 1e-3)
        assert 0.0 <= rect.angle_deg < 90.0


def test_rect_contains_all_points(rng):
    for _ in range(20):
        points = rng.uniform(-50, 50, size=(8, 2))
        rect = min_area_rect(points)
        theta = math.radians(rect.angle_deg)
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        rel = points - np.asarray(rect.center)
        u = rel[:, 0] * cos_t + rel[:, 1] * sin_t
        v = -rel[:, 0] * sin_t + rel[:, 1] * cos_t
        assert np.all(np.abs(u) <= rect.size[0] / 2 + 1e-9)
        assert np.all(np.abs(v) <= rect.size[1] / 2 + 1e-9)


def test_collinear_points_rejected():
    with pytest.raises(GeometryError):
        min_area_rect([(0, 0), (5, 5), (10, 10), (15, 15)])
    with pytest.raises(GeometryError):
        min_area_rect([(0, 0), (0, 0), (1, 1)])


def test_bbox_corners_order():
    corners = bbox_corners((10, 20, 100, 50))
    assert corners.tolist() == [[10, 20], [110, 20], [110, 70], [10, 70]]


def test_deskew_output_height_and_aspect():
    corners = _rect_corners((100.0, 80.0), (120.0, 30.0), 20.0)
    rect = min_area_rect(corners)
    matrix, (out_w, out_h), rotation = deskew_matrix(rect, 48)
    assert out_h == 48
    assert out_w == round(120.0 * 48 / 30.0)
    assert abs(rotation) < 90.0


def test_deskew_idempotent_on_mapped_corners(rng):
    """Corners mapped into output space must be axis-aligned within 0.5 deg."""
    for _ in range(15):
        center = rng.uniform(40, 200, 2)
        size = sorted(rng.uniform(15, 120, 2), reverse=True)
        angle = rng.uniform(0, 180)
        corners = _rect_corners(center, size, angle)
        rect = min_area_rect(corners)
        matrix, (out_w, out_h), _ = deskew_matrix(rect, 48)
        inverse = np.linalg.inv(matrix)
        homogeneous = np.hstack([corners, np.ones((4, 1))]) @ inverse.T
        mapped = homogeneous[:, :2] / homogeneous[:, 2:3]
        remapped = min_area_rect(mapped)
        assert min(remapped.angle_deg, 90.0 - remapped.angle_deg) < 0.5
        # The long side lands horizontally, spanning the output width.
        assert max(remapped.size) == pytest.approx(out_w, rel=0.02)
        assert min(remapped.size) == pytest.approx(out_h, rel=0.02)


def test_deskew_crop_recovers_rotated_patch(rng):
    """A rotated bright rectangle deskews to a level, height-48 crop."""
    image = np.zeros((240, 320, 3), dtype=np.float64)
    corners = _rect_corners((160.0, 120.0), (140.0, 40.0), 15.0)
    # Paint the rectangle by point-in-quad test on the pixel grid.
    ys, xs = np.mgrid[0:240, 0:320]
    theta = math.radians(15.0)
    rel_x = xs + 0.5 - 160.0
    rel_y = ys + 0.5 - 120.0
    u = rel_x * math.cos(theta) + rel_y * math.sin(theta)
    v = -rel_x * math.sin(theta) + rel_y * math.cos(theta)
    inside = (np.abs(u) <= 70.0) & (np.abs(v) <= 20.0)
    image[inside] = 220.0
    crop = deskew_crop(image.astype(np.uint8), corners, h_out=48)
    assert crop.shape[0] == 48
    assert crop.shape[1] == round(140.0 * 48 / 40.0)
    interior = crop[8:-8, 8:-8]
    assert (interior > 180).mean() > 0.98


def test_deskew_preserves_shear():
    """A sheared quad is only rotated, not rectified to a rectangle."""
    quad = np.array([[0.0, 0.0], [100.0, 0.0], [130.0, 40.0], [30.0, 40.0]])
    rect = min_area_rect(quad)
    matrix, out_size, _ = deskew_matrix(rect, 48)
    inverse = np.linalg.inv(matrix)
    homogeneous = np.hstack([quad, np.ones((4, 1))]) @ inverse.T
    mapped = homogeneous[:, :2] / homogeneous[:, 2:3]
    top = mapped[1] - mapped[0]
    left = mapped[3] - mapped[0]
    # Shear survives: the left edge is far from perpendicular to the top.
    cosine = abs(np.dot(top, left)) / (np.linalg.norm(top) * np.linalg.norm(left))
    assert cosine > 0.3


def test_deskew_rejects_bad_height():
    rect = min_area_rect([(0, 0), (10, 0), (10, 5), (0, 5)])
    with pytest.raises(ConfigError):
        deskew_matrix(rect, 0)


def _annotation(corners, bbox=(0, 0, 10, 10)):
    return FrameAnnotation(
        frame_index=0,
        label="B-AB123",
        bbox=bbox,
        corners=tuple((float(x), float(y)) for x, y in corners),
        occluded=False,
        occlusion_sides=(),
    )


def test_prep_frame_corner_and_bbox_paths(rng):
    image = rng.integers(0, 256, size=(120, 160, 3), dtype=np.uint8)
    corners = _rect_corners((80.0, 60.0), (80.0, 24.0), 10.0)
    ann = _annotation(corners, bbox=(30, 40, 90, 40))
    prov = SampleProvenance("synthetic", "seq_000", 0)

    by_corners = prep_frame(image, ann, prov)
    assert by_corners.image.shape[0] == H_OUT_DEFAULT
    assert by_corners.label == "B-AB123"
    assert by_corners.provenance.sample_id == "synthetic/seq_000/000000"

    by_bbox = prep_frame(image, ann, prov, use_corners=False)
    assert by_bbox.image.shape == (48, round(90 * 48 / 40), 3)
    # The bbox path must equal a plain crop + scale of the bbox region.
    reference = deskew_crop(image, bbox_corners((30, 40, 90, 40)), 48)
    assert np.array_equal(by_bbox.image, reference)


def test_provenance_validation():
    with pytest.raises(ConfigError):
        SampleProvenance("augmented", "seq", 0)
    prov = SampleProvenance("partly_real", "seq_003", 41)
    assert prov.sample_id == "partly_real/seq_003/000041"


def test_prepped_sample_validation(rng):
    good = rng.integers(0, 256, size=(48, 100, 3), dtype=np.uint8)
    prov = SampleProvenance("real", "cam1", 3)
    with pytest.raises(ConfigError):
        PreppedSample(image=good, label="", provenance=prov)
    with pytest.raises(ConfigError):
        PreppedSample(image=good[:, :, 0], label="B-A1", provenance=prov)


def test_manifest_round_trip(tmp_path, rng):
    image = rng.integers(0, 256, size=(48, 90, 3), dtype=np.uint8)
    entries = []
    for i, (dtype, label) in enumerate(
        [("synthetic", "B-AB123"), ("partly_real", "M-X1"), ("real", "HH-AB1234")]
    ):
        sample = PreppedSample(
            image=image, label=label, provenance=SampleProvenance(dtype, f"seq_{i}", i)
        )
        entries.append((f"images/{i}.png", sample))
    path = tmp_path / "manifest.tsv"
    write_manifest(entries, path)
    rows = read_manifest(path)
    assert len(rows) == 3
    assert rows[0] == ("images/0.png", "B-AB123", SampleProvenance("synthetic", "seq_0", 0))
    assert rows[2][2].frame_index == 2


def test_manifest_rejects_malformed_line(tmp_path):
    path = tmp_path / "manifest.tsv"
    path.write_text("images/0.png\tB-AB123\tonly_three\n")
    with pytest.raises(ConfigError, match="fields"):
        read_manifest(path)


def test_manifest_skips_blank_lines(tmp_path):
    path = tmp_path / "manifest.tsv"
    path.write_text("a.png\tB-A1\tsynthetic\tseq\t0\n\n")
    assert len(read_manifest(path)) == 1
