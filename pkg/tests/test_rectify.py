"""Homography estimation, display detection, decode, and the rectify chain."""

from __future__ import annotations

import numpy as np
import pytest

from platesynth.annotations import FrameAnnotation, SequenceAnnotation
from platesynth.camera import DEFAULT_CAMERAS, DEFAULT_LIGHTS
from platesynth.errors import (
    DegenerateHomographyError,
    IndexUndecodableError,
    QuadNotFoundError,
)
from platesynth.playback import PlaybackLayout, compose_playback_frame
from platesynth.rectify import (
    Homography,
    decode_frame_index,
    detect_display_quad,
    estimate_homography,
    process_recorded_sequence,
    rectify,
    transfer_bbox,
)

SQUARE = np.array([[0.0, 0.0], [100.0, 0.0], [100.0, 100.0], [0.0, 100.0]])


def _spread_points(rng, count, width=800.0, height=600.0):
    return np.column_stack(
        [rng.uniform(0, width, count), rng.uniform(0, height, count)]
    )


def _random_homography(rng):
    matrix = np.eye(3)
    matrix[:2, :2] += 0.2 * rng.standard_normal((2, 2))
    matrix[:2, 2] = rng.uniform(-40, 40, 2)
    matrix[2, :2] = rng.uniform(-1e-4, 1e-4, 2)
    return Homography(matrix)


def _normalized(matrix):
    return matrix / matrix[2, 2]


def test_identity_recovered_exactly():
    h = estimate_homography(SQUARE, SQUARE)
    assert np.allclose(_normalized(h.matrix), np.eye(3), atol=1e-9)


def test_translation_recovered_exactly():
    shifted = SQUARE + [12.5, -7.25]
    h = estimate_homography(SQUARE, shifted)
    expected = np.array([[1.0, 0.0, 12.5], [0.0, 1.0, -7.25], [0.0, 0.0, 1.0]])
    assert np.allclose(_normalized(h.matrix), expected, atol=1e-9)


@pytest.mark.parametrize("count", [4, 20])
def test_random_homographies_recovered(rng, count):
    for _ in range(25):
        truth = _random_homography(rng)
        src = _spread_points(rng, count)
        dst = truth.apply(src)
        estimated = estimate_homography(src, dst)
        assert np.allclose(
            _normalized(estimated.matrix), _normalized(truth.matrix), atol=1e-6
        )


def test_collinear_points_rejected():
    src = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(DegenerateHomographyError):
        estimate_homography(src, SQUARE)
    with pytest.raises(DegenerateHomographyError):
        estimate_homography(SQUARE, src)


def test_coincident_points_rejected():
    src = np.zeros((4, 2))
    with pytest.raises(DegenerateHomographyError):
        estimate_homography(src, SQUARE)


def test_too_few_points_rejected():
    with pytest.raises(DegenerateHomographyError):
        estimate_homography(SQUARE[:3], SQUARE[:3])


def test_homography_apply_inverse_round_trip(rng):
    h = _random_homography(rng)
    points = _spread_points(rng, 12)
    back = h.inverse().apply(h.apply(points))
    assert np.allclose(back, points, atol=1e-8)


def test_singular_matrix_rejected():
    with pytest.raises(DegenerateHomographyError):
        Homography(np.zeros((3, 3)))


def _smooth_card(rng, height=300, width=400):
    """A low-frequency RGB test card (smoothness keeps resampling loss small)."""
    yy, xx = np.mgrid[0:height, 0:width]
    card = np.stack(
        [
            128 + 90 * np.sin(xx / 37.0) * np.cos(yy / 29.0),
            128 + 80 * np.cos(xx / 23.0 + 1.0),
            128 + 70 * np.sin(yy / 41.0 + 2.0),
        ],
        axis=-1,
    )
    return np.clip(card, 0, 255).astype(np.uint8)


def _psnr(a, b):
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = (diff * diff).mean()
    return 10.0 * np.log10(255.0**2 / mse)


def test_warp_then_rectify_recovers_card(rng):
    card = _smooth_card(rng)
    height, width = card.shape[:2]
    corners = np.array([[0.0, 0.0], [width, 0.0], [width, height], [0.0, height]])
    warped_corners = corners + rng.uniform(-12, 12, corners.shape)
    to_card = estimate_homography(warped_corners, corners)
    recorded = rectify(card, to_card, (width + 40, height + 40))
    back = rectify(recorded, to_card.inverse(), (width, height))
    interior = (slice(20, height - 20), slice(20, width - 20))
    assert _psnr(back[interior], card[interior]) > 30.0


@pytest.fixture(scope="module")
def layout():
    return PlaybackLayout()


@pytest.fixture(scope="module")
def embedded():
    rng = np.random.default_rng(99)
    base = rng.integers(40, 200, size=(1080, 1920, 3), dtype=np.uint8)
    return base


def test_detect_finds_fiducial_centers(embedded, layout):
    canvas = compose_playback_frame(embedded, 3, "B-AB123", layout)
    quad = detect_display_quad(canvas, layout)
    assert quad.method == "fiducial"
    expected = np.asarray(layout.fiducial_centers)
    assert np.allclose(quad.corners, expected, atol=0.5)
    assert np.array_equal(quad.anchors, expected)


def test_detect_rejects_blank_image(layout):
    blank = np.full((540, 960, 3), 128, dtype=np.uint8)
    with pytest.raises(QuadNotFoundError):
        detect_display_quad(blank, layout)


def test_fallback_bright_quad_path(layout):
    image = np.zeros((540, 960, 3), dtype=np.uint8)
    image[100:400, 200:700] = 230
    quad = detect_display_quad(image, layout)
    assert quad.method == "bright_quad"
    expected = np.array(
        [[200.5, 100.5], [699.5, 100.5], [699.5, 399.5], [200.5, 399.5]]
    )
    assert np.allclose(quad.corners, expected, atol=1.0)
    width, height = layout.canvas_size
    assert np.array_equal(
        quad.anchors, [[0, 0], [width, 0], [width, height], [0, height]]
    )


def test_fallback_gate_rejects_small_bright_region(layout):
    image = np.zeros((540, 960, 3), dtype=np.uint8)
    image[260:280, 470:490] = 230
    with pytest.raises(QuadNotFoundError):
        detect_display_quad(image, layout)


def test_fallback_gate_rejects_border_touching_region(layout):
    image = np.zeros((540, 960, 3), dtype=np.uint8)
    image[0:400, 200:700] = 230
    with pytest.raises(QuadNotFoundError):
        detect_display_quad(image, layout)


@pytest.mark.parametrize("index", [0, 7, 511, 2**24 - 1])
def test_decode_round_trip_through_pixels(embedded, layout, index):
    canvas = compose_playback_frame(embedded, index, "B-AB123", layout)
    assert decode_frame_index(canvas, layout) == index


def test_decode_rejects_tampered_checksum_cell(embedded, layout):
    canvas = compose_playback_frame(embedded, 12345, "B-AB123", layout)
    cw, ch = layout.strip_cell_size
    sx, sy = layout.strip_origin
    cell = 28  # first checksum cell
    region = canvas[sy : sy + ch, sx + cell * cw : sx + (cell + 1) * cw]
    region[:] = 255 - region
    with pytest.raises(IndexUndecodableError):
        decode_frame_index(canvas, layout)


def test_decode_rejects_wrong_canvas_size(layout):
    with pytest.raises(IndexUndecodableError):
        decode_frame_index(np.zeros((1080, 1920, 3), dtype=np.uint8), layout)


def test_transfer_bbox_is_pure_shift(layout):
    assert transfer_bbox((0, 0, 10, 10), layout) == (960, 540, 10, 10)
    assert transfer_bbox((100, 50, 200, 80), layout) == (1060, 590, 200, 80)


def _source_annotation(indices, label="B-AB123"):
    frames = tuple(
        FrameAnnotation(
            frame_index=i,
            label=label,
            bbox=(10 + i, 20, 100, 25),
            corners=((10.0, 20.0), (110.0, 20.0), (110.0, 45.0), (10.0, 45.0)),
            occluded=False,
            occlusion_sides=(),
        )
        for i in indices
    )
    return SequenceAnnotation(
        render_engine="platesynth-rasterizer 0.1.0",
        resolution=(1920, 1080),
        camera=DEFAULT_CAMERAS[0],
        light=DEFAULT_LIGHTS[0],
        frames=frames,
    )


def test_process_identity_recording(embedded, layout):
    source = _source_annotation([0, 1, 2])
    recorded = [
        compose_playback_frame(embedded, i, "B-AB123", layout) for i in (2, 0, 1)
    ]
    annotation, outcomes = process_recorded_sequence(recorded, source, layout)
    assert [o.status for o in outcomes] == ["ok", "ok", "ok"]
    # Outcomes follow the recording order; annotation is sorted by index.
    assert [o.frame_index for o in outcomes] == [2, 0, 1]
    assert [f.frame_index for f in annotation.frames] == [0, 1, 2]
    assert annotation.resolution == layout.canvas_size
    assert annotation.label == "B-AB123"
    for frame in annotation.frames:
        assert frame.bbox == (970 + frame.frame_index, 560, 100, 25)
        assert frame.corners[0] == (970.0, 560.0)
    for outcome in outcomes:
        assert outcome.rectified.shape == (2160, 3840, 3)


def test_process_duplicate_index_keeps_first(embedded, layout):
    source = _source_annotation([0, 1])
    first = compose_playback_frame(embedded, 1, "B-AB123", layout)
    second = compose_playback_frame(embedded // 2 + 30, 1, "B-AB123", layout)
    annotation, outcomes = process_recorded_sequence([first, second], source, layout)
    assert [o.status for o in outcomes] == ["ok", "index_undecodable"]
    assert len(annotation.frames) == 1
    # First occurrence won: the rectified embed matches the first recording.
    embed = outcomes[0].rectified[540:1620, 960:2880]
    assert np.mean(np.abs(embed.astype(int) - embedded.astype(int))) < 2.0


def test_process_unknown_index_is_skipped(embedded, layout):
    source = _source_annotation([0, 1])
    recorded = [compose_playback_frame(embedded, 9, "B-AB123", layout)]
    annotation, outcomes = process_recorded_sequence(recorded, source, layout)
    assert outcomes[0].status == "index_undecodable"
    assert "9" in outcomes[0].detail
    assert annotation.frames == ()


def test_process_unreadable_frame_reports_quad_not_found(embedded, layout):
    source = _source_annotation([0])
    gray = np.full((2160, 3840, 3), 128, dtype=np.uint8)
    good = compose_playback_frame(embedded, 0, "B-AB123", layout)
    annotation, outcomes = process_recorded_sequence([gray, good], source, layout)
    assert [o.status for o in outcomes] == ["quad_not_found", "ok"]
    assert len(annotation.frames) == 1
