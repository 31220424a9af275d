"""Per-sequence annotation documents: values, XML codec, JSON mirror.

The XML document is the authoritative format (schema documented in
``docs/annotation_format.md``, XSD in ``docs/annotation_schema.xsd``); an
equivalent JSON mirror is written alongside for tooling that prefers it.
Reading validates strictly and rejects invariant-violating documents
instead of repairing them.

Serialization is byte-deterministic: fixed element and attribute order,
floats written with ``repr`` (shortest round-trip form).
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path

from .camera import CameraPreset, LightPreset
from .errors import AnnotationError

SCHEMA_VERSION = 1

OCCLUSION_SIDES = ("left", "right", "top", "bottom")
CORNER_NAMES = ("tl", "tr", "br", "bl")


@dataclass(frozen=True)
class FrameAnnotation:
    """Ground truth for one rendered frame."""

    frame_index: int
    label: str
    bbox: tuple[int, int, int, int]
    corners: tuple[tuple[float, float], ...]
    occluded: bool
    occlusion_sides: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise AnnotationError(f"frame_index must be >= 0, got {self.frame_index}")
        if not self.label:
            raise AnnotationError("label must be non-empty")
        if len(self.bbox) != 4:
            raise AnnotationError(f"bbox must have 4 entries, got {self.bbox!r}")
        if self.bbox[2] < 0 or self.bbox[3] < 0:
            raise AnnotationError(f"bbox size must be non-negative, got {self.bbox!r}")
        if len(self.corners) != 4:
            raise AnnotationError(f"exactly 4 corners required, got {len(self.corners)}")
        bad_sides = [s for s in self.occlusion_sides if s not in OCCLUSION_SIDES]
        if bad_sides:
            raise AnnotationError(f"unknown occlusion sides {bad_sides!r}")
        if len(set(self.occlusion_sides)) != len(self.occlusion_sides):
            raise AnnotationError("occlusion_sides contains duplicates")
        if self.occluded != bool(self.occlusion_sides):
            raise AnnotationError(
                "occluded flag must match occlusion_sides: "
                f"occluded={self.occluded}, sides={self.occlusion_sides!r}"
            )


@dataclass(frozen=True)
class SequenceAnnotation:
    """All per-frame annotations of one sequence plus render provenance."""

    render_engine: str
    resolution: tuple[int, int]
    camera: CameraPreset
    light: LightPreset
    frames: tuple[FrameAnnotation, ...]
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise AnnotationError(
                f"schema version {self.schema_version} unsupported "
                f"(expected {SCHEMA_VERSION})"
            )
        indices = [f.frame_index for f in self.frames]
        if any(b <= a for a, b in zip(indices[:-1], indices[1:])):
            raise AnnotationError("frames must be sorted by strictly increasing frame_index")
        labels = {f.label for f in self.frames}
        if len(labels) > 1:
            raise AnnotationError(f"all frames must share one label, got {sorted(labels)}")

    @property
    def label(self) -> str | None:
        return self.frames[0].label if self.frames else None


def _fmt(value: float) -> str:
    return repr(float(value))


def _vector_element(parent: ET.Element, tag: str, names: tuple[str, ...], values) -> None:
    el = ET.SubElement(parent, tag)
    for name, value in zip(names, values):
        el.set(name, _fmt(value))


def _camera_element(parent: ET.Element, camera: CameraPreset) -> None:
    el = ET.SubElement(parent, "camera")
    el.set("preset_id", camera.preset_id)
    el.set("focal_length_mm", _fmt(camera.focal_length_mm))
    el.set("f_number", _fmt(camera.f_number))
    _vector_element(el, "position", ("x", "y", "z"), camera.position)
    _vector_element(el, "tilt", ("pitch", "yaw", "roll"), camera.tilt)
    _vector_element(el, "sensor_size", ("width_mm", "height_mm"), camera.sensor_size_mm)
    native = ET.SubElement(el, "native_resolution")
    native.set("width", str(camera.native_resolution[0]))
    native.set("height", str(camera.native_resolution[1]))


def _camera_from_element(el: ET.Element) -> CameraPreset:
    position = el.find("position")
    tilt = el.find("tilt")
    sensor = el.find("sensor_size")
    native = el.find("native_resolution")
    if position is None or tilt is None or sensor is None or native is None:
        raise AnnotationError("camera element is missing child elements")
    return CameraPreset(
        preset_id=el.get("preset_id", ""),
        position=(float(position.get("x")), float(position.get("y")), float(position.get("z"))),
        tilt=(float(tilt.get("pitch")), float(tilt.get("yaw")), float(tilt.get("roll"))),
        sensor_size_mm=(float(sensor.get("width_mm")), float(sensor.get("height_mm"))),
        focal_length_mm=float(el.get("focal_length_mm")),
        f_number=float(el.get("f_number")),
        native_resolution=(int(native.get("width")), int(native.get("height"))),
    )


def _light_element(parent: ET.Element, light: LightPreset) -> None:
    el = ET.SubElement(parent, "light")
    el.set("preset_id", light.preset_id)
    el.set("kind", light.kind)
    el.set("intensity", _fmt(light.intensity))
    el.set("beam_angle", _fmt(light.beam_angle))
    _vector_element(el, "position", ("x", "y", "z"), light.position)
    _vector_element(el, "direction", ("x", "y", "z"), light.direction)


def _light_from_element(el: ET.Element) -> LightPreset:
    position = el.find("position")
    direction = el.find("direction")
    if position is None or direction is None:
        raise AnnotationError("light element is missing child elements")
    return LightPreset(
        preset_id=el.get("preset_id", ""),
        kind=el.get("kind", ""),
        intensity=float(el.get("intensity")),
        position=(float(position.get("x")), float(position.get("y")), float(position.get("z"))),
        direction=(
            float(direction.get("x")),
            float(direction.get("y")),
            float(direction.get("z")),
        ),
        beam_angle=float(el.get("beam_angle")),
    )


def _frame_element(parent: ET.Element, frame: FrameAnnotation) -> None:
    el = ET.SubElement(parent, "frame")
    el.set("index", str(frame.frame_index))
    el.set("label", frame.label)
    el.set("occluded", "true" if frame.occluded else "false")
    bbox = ET.SubElement(el, "bbox")
    for name, value in zip(("x", "y", "w", "h"), frame.bbox):
        bbox.set(name, str(int(value)))
    corners = ET.SubElement(el, "corners")
    for name, (x, y) in zip(CORNER_NAMES, frame.corners):
        corner = ET.SubElement(corners, "corner")
        corner.set("name", name)
        corner.set("x", _fmt(x))
        corner.set("y", _fmt(y))
    sides = ET.SubElement(el, "occlusion_sides")
    for side in frame.occlusion_sides:
        ET.SubElement(sides, "side").text = side


def _frame_from_element(el: ET.Element) -> FrameAnnotation:
    bbox = el.find("bbox")
    corners_el = el.find("corners")
    sides_el = el.find("occlusion_sides")
    if bbox is None or corners_el is None or sides_el is None:
        raise AnnotationError("frame element is missing child elements")
    corner_map = {c.get("name"): (float(c.get("x")), float(c.get("y"))) for c in corners_el}
    missing = [name for name in CORNER_NAMES if name not in corner_map]
    if missing:
        raise AnnotationError(f"frame is missing corners {missing!r}")
    occluded_text = el.get("occluded", "")
    if occluded_text not in ("true", "false"):
        raise AnnotationError(f"occluded must be 'true' or 'false', got {occluded_text!r}")
    return FrameAnnotation(
        frame_index=int(el.get("index")),
        label=el.get("label", ""),
        bbox=tuple(int(bbox.get(k)) for k in ("x", "y", "w", "h")),
        corners=tuple(corner_map[name] for name in CORNER_NAMES),
        occluded=occluded_text == "true",
        occlusion_sides=tuple(side.text or "" for side in sides_el),
    )


def annotation_to_xml(seq: SequenceAnnotation) -> ET.ElementTree:
    root = ET.Element("sequence")
    root.set("schema_version", str(seq.schema_version))
    ET.SubElement(root, "render_engine").text = seq.render_engine
    resolution = ET.SubElement(root, "resolution")
    resolution.set("width", str(seq.resolution[0]))
    resolution.set("height", str(seq.resolution[1]))
    _camera_element(root, seq.camera)
    _light_element(root, seq.light)
    frames = ET.SubElement(root, "frames")
    frames.set("count", str(len(seq.frames)))
    for frame in seq.frames:
        _frame_element(frames, frame)
    tree = ET.ElementTree(root)
    ET.indent(tree, space="  ")
    return tree


def annotation_from_xml(root: ET.Element) -> SequenceAnnotation:
    if root.tag != "sequence":
        raise AnnotationError(f"expected <sequence> root, got <{root.tag}>")
    try:
        version = int(root.get("schema_version", "-1"))
    except ValueError as exc:
        raise AnnotationError(f"bad schema_version attribute: {exc}") from exc
    engine = root.findtext("render_engine")
    resolution_el = root.find("resolution")
    camera_el = root.find("camera")
    light_el = root.find("light")
    frames_el = root.find("frames")
    if engine is None or resolution_el is None or camera_el is None or light_el is None or frames_el is None:
        raise AnnotationError("sequence document is missing required elements")
    try:
        frames = tuple(_frame_from_element(f) for f in frames_el.findall("frame"))
        seq = SequenceAnnotation(
            render_engine=engine,
            resolution=(int(resolution_el.get("width")), int(resolution_el.get("height"))),
            camera=_camera_from_element(camera_el),
            light=_light_from_element(light_el),
            frames=frames,
            schema_version=version,
        )
    except (TypeError, ValueError) as exc:
        raise AnnotationError(f"malformed annotation document: {exc}") from exc
    declared = int(frames_el.get("count", len(frames)))
    if declared != len(frames):
        raise AnnotationError(
            f"frame count attribute {declared} does not match {len(frames)} frame elements"
        )
    return seq


def _annotation_to_dict(seq: SequenceAnnotation) -> dict:
    return {
        "schema_version": seq.schema_version,
        "render_engine": seq.render_engine,
        "resolution": list(seq.resolution),
        "camera": {
            "preset_id": seq.camera.preset_id,
            "position": list(seq.camera.position),
            "tilt": list(seq.camera.tilt),
            "sensor_size_mm": list(seq.camera.sensor_size_mm),
            "focal_length_mm": seq.camera.focal_length_mm,
            "f_number": seq.camera.f_number,
            "native_resolution": list(seq.camera.native_resolution),
        },
        "light": {
            "preset_id": seq.light.preset_id,
            "kind": seq.light.kind,
            "intensity": seq.light.intensity,
            "position": list(seq.light.position),
            "direction": list(seq.light.direction),
            "beam_angle": seq.light.beam_angle,
        },
        "frames": [
            {
                "frame_index": f.frame_index,
                "label": f.label,
                "bbox": list(f.bbox),
                "corners": [[x, y] for x, y in f.corners],
                "occluded": f.occluded,
                "occlusion_sides": list(f.occlusion_sides),
            }
            for f in seq.frames
        ],
    }


def write_annotation(seq: SequenceAnnotation, destination) -> Path:
    """Write the XML document plus its JSON mirror; returns the XML path.

    The mirror shares the stem with a ``.json`` suffix.  XML stays the
    authoritative format; the mirror is derived and never read back.
    """
    path = Path(destination)
    tree = annotation_to_xml(seq)
    with open(path, "wb") as fh:
        tree.write(fh, encoding="utf-8", xml_declaration=True)
        fh.write(b"\n")
    mirror = path.with_suffix(".json")
    with open(mirror, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_annotation_to_dict(seq), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_annotation(source) -> SequenceAnnotation:
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise AnnotationError(f"not well-formed XML: {exc}") from exc
    return annotation_from_xml(root)
