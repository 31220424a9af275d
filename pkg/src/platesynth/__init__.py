"""Synthetic license-plate dataset toolchain.

Generates annotated plate image sequences with a deterministic software
rasterizer, composes playback canvases for screen re-capture, rectifies
and re-annotates recordings, prepares OCR crops, manages nested dataset
splits, and scores recognition output (CER, miss rate).
"""

from .annotations import (
    FrameAnnotation,
    SequenceAnnotation,
    read_annotation,
    write_annotation,
)
from .camera import CameraPreset, LightPreset, camera_bank, light_bank, project_point
from .errors import (
    AnnotationError,
    AssetError,
    ConfigError,
    DegenerateHomographyError,
    EvaluationError,
    GeometryError,
    IndexUndecodableError,
    PlateGrammarError,
    PlatesynthError,
    ProjectionError,
    QuadNotFoundError,
    RectifyError,
    SplitError,
    TrajectoryError,
)
from .glyphs import GlyphAtlas, build_atlas, default_atlas, load_atlas, save_atlas
from .metrics import EvalReport, cer, evaluate_predictions, evaluate_run, levenshtein, miss_rate
from .plates import PlateString, format_label, generate_plate, parse_label
from .playback import PlaybackLayout, compose_playback_frame
from .prep import (
    PreppedSample,
    RotatedRect,
    SampleProvenance,
    deskew_crop,
    min_area_rect,
    prep_frame,
)
from .prng import SplitMix64, derive_seed, permutation, stream_floats, stream_u64
from .rectify import (
    DisplayQuad,
    Homography,
    RectifyOutcome,
    decode_frame_index,
    detect_display_quad,
    estimate_homography,
    process_recorded_sequence,
    rectify,
    transfer_bbox,
)
from .render import (
    RenderedFrame,
    prepare_assets,
    render_frame,
    render_print_master,
    render_sequence,
)
from .scene import (
    SceneConfig,
    generate_config,
    parse_config,
    read_config,
    serialize_config,
    write_config,
)
from .splits import DatasetSplit, build_subsets, make_split, read_split, verify_split, write_split
from .textures import PlateGeometry, layout_plate, rasterize_plate_texture
from .trajectory import TrajectorySpline, evaluate_trajectory, sample_trajectory

__version__ = "0.1.0"

__all__ = [
    "AnnotationError",
    "AssetError",
    "CameraPreset",
    "ConfigError",
    "DatasetSplit",
    "DegenerateHomographyError",
    "DisplayQuad",
    "EvalReport",
    "EvaluationError",
    "FrameAnnotation",
    "GeometryError",
    "GlyphAtlas",
    "Homography",
    "IndexUndecodableError",
    "LightPreset",
    "PlateGeometry",
    "PlateGrammarError",
    "PlateString",
    "PlatesynthError",
    "PlaybackLayout",
    "PreppedSample",
    "ProjectionError",
    "QuadNotFoundError",
    "RectifyError",
    "RectifyOutcome",
    "RenderedFrame",
    "RotatedRect",
    "SampleProvenance",
    "SceneConfig",
    "SequenceAnnotation",
    "SplitError",
    "SplitMix64",
    "TrajectoryError",
    "TrajectorySpline",
    "build_atlas",
    "build_subsets",
    "camera_bank",
    "cer",
    "compose_playback_frame",
    "decode_frame_index",
    "default_atlas",
    "derive_seed",
    "deskew_crop",
    "detect_display_quad",
    "estimate_homography",
    "evaluate_predictions",
    "evaluate_run",
    "evaluate_trajectory",
    "format_label",
    "generate_config",
    "generate_plate",
    "layout_plate",
    "levenshtein",
    "light_bank",
    "load_atlas",
    "make_split",
    "min_area_rect",
    "miss_rate",
    "parse_config",
    "parse_label",
    "permutation",
    "prep_frame",
    "prepare_assets",
    "process_recorded_sequence",
    "project_point",
    "rasterize_plate_texture",
    "read_annotation",
    "read_config",
    "read_split",
    "rectify",
    "render_frame",
    "render_print_master",
    "render_sequence",
    "sample_trajectory",
    "save_atlas",
    "serialize_config",
    "stream_floats",
    "stream_u64",
    "transfer_bbox",
    "verify_split",
    "write_annotation",
    "write_config",
    "write_split",
]
