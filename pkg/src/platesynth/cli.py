"""Command line pipeline: one subcommand per stage.

gen-configs      draw scene configurations from a seed
render           rasterize configured sequences to frames + annotations
compose-playback embed rendered frames in 4K playback canvases
rectify          recover canvases from recordings, transfer annotations
prep             cut deskewed OCR crops and a sample manifest
split            build nested train/validation/test memberships
evaluate         score a predictions file (CER, miss rate)
print-master     write a dpi-tagged frontal plate image

Every run is driven entirely by its flags (no environment variables) and
leaves one run_manifest.json in its output directory, written atomically
when the run finishes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, kernels
from .annotations import read_annotation, write_annotation
from .errors import ConfigError, PlatesynthError
from .imageio import read_png, write_png
from .metrics import evaluate_run
from .playback import PlaybackLayout, compose_playback_frame
from .plates import parse_label
from .prep import SampleProvenance, prep_frame, read_manifest, write_manifest
from .prng import derive_seed
from .rectify import STATUS_OK, process_recorded_sequence
from .render import render_print_master, render_sequence
from .scene import generate_config, load_preset_bank, read_config, write_config
from .splits import (
    build_subsets,
    format_ratio,
    make_split,
    read_split,
    verify_nesting,
    verify_split,
    write_split,
)

FRAME_NAME = "frame_{index:06d}.png"
MANIFEST_NAME = "run_manifest.json"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_run_manifest(
    out_dir: Path,
    command: str,
    inputs: list[str],
    seeds: dict[str, int],
    started_at: str,
) -> None:
    """Atomically write the single run manifest for an output directory."""
    payload = {
        "command": command,
        "config_paths": sorted(inputs),
        "seeds": seeds,
        "output_dir": str(out_dir),
        "tool_version": __version__,
        "started_at": started_at,
        "finished_at": _utc_now(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp_name, out_dir / MANIFEST_NAME)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def _parse_pair(text: str, sep: str, caster) -> tuple:
    parts = text.split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}: {text!r}")
    try:
        return tuple(caster(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _resolution(text: str) -> tuple[int, int]:
    return _parse_pair(text, "x", int)


def _depth_range(text: str) -> tuple[float, float]:
    return _parse_pair(text, ":", float)


def _load_layout(path: str | None) -> PlaybackLayout:
    """Layout constants file: JSON object of PlaybackLayout field overrides."""
    if path is None:
        return PlaybackLayout()
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"layout file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("layout file must hold a JSON object")

    def listify(value):
        return tuple(listify(v) for v in value) if isinstance(value, list) else value

    try:
        return PlaybackLayout(**{key: listify(value) for key, value in data.items()})
    except TypeError as exc:
        raise ConfigError(f"unknown layout field: {exc}") from exc


def _config_paths(entries: list[str]) -> list[Path]:
    paths: list[Path] = []
    for entry in entries:
        path = Path(entry)
        if path.is_dir():
            found = sorted(path.glob("config_*.txt"))
            if not found:
                raise ConfigError(f"no config_*.txt files under {path}")
            paths.extend(found)
        elif path.is_file():
            paths.append(path)
        else:
            raise ConfigError(f"no such config file or directory: {path}")
    return paths


def _frame_paths(directory: Path) -> list[Path]:
    paths = sorted(p for p in directory.glob("*.png"))
    if not paths:
        raise ConfigError(f"no PNG frames under {directory}")
    return paths


def _sequence_dirs(entries: list[str]) -> list[Path]:
    dirs: list[Path] = []
    for entry in entries:
        path = Path(entry)
        if (path / "annotation.xml").is_file():
            dirs.append(path)
            continue
        if path.is_dir():
            nested = sorted(
                child for child in path.iterdir() if (child / "annotation.xml").is_file()
            )
            if nested:
                dirs.extend(nested)
                continue
        raise ConfigError(f"{path} holds no sequence (annotation.xml not found)")
    return dirs


def cmd_gen_configs(args: argparse.Namespace) -> int:
    started = _utc_now()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cameras = lights = None
    inputs: list[str] = []
    if args.preset_bank:
        cameras, lights = load_preset_bank(args.preset_bank)
        inputs.append(args.preset_bank)
    for index in range(args.count):
        config = generate_config(
            derive_seed(args.seed, index),
            cameras,
            lights,
            resolution=args.resolution,
            scene_length=args.scene_length,
            depth_range=args.depth_range,
        )
        write_config(config, out_dir / f"config_{index:03d}.txt")
    write_run_manifest(out_dir, "gen-configs", inputs, {"seed": args.seed}, started)
    print(f"wrote {args.count} configs to {out_dir}")
    return 0


def _render_one(config_path: str, sequence_dir: str, backend: str | None, atlas: str | None) -> int:
    # Runs in worker processes: must re-select the backend there.
    if backend is not None:
        kernels.set_backend(backend)
    from .glyphs import default_atlas, load_atlas

    config = read_config(config_path)
    seq_dir = Path(sequence_dir)
    seq_dir.mkdir(parents=True, exist_ok=True)
    glyphs = load_atlas(atlas) if atlas else default_atlas()
    frames, annotation = render_sequence(config, glyphs)
    write_config(config, seq_dir / "config.txt")
    for frame in frames:
        name = FRAME_NAME.format(index=frame.annotation.frame_index)
        write_png(frame.pixels, seq_dir / name)
    write_annotation(annotation, seq_dir / "annotation.xml")
    return len(frames)


def cmd_render(args: argparse.Namespace) -> int:
    started = _utc_now()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.backend is not None:
        kernels.set_backend(args.backend)
    configs = _config_paths(args.configs)
    jobs = [
        (str(path), str(out_dir / path.stem), args.backend, args.atlas) for path in configs
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            counts = list(pool.map(_render_one, *zip(*jobs)))
    else:
        counts = [_render_one(*job) for job in jobs]
    write_run_manifest(
        out_dir, "render", [str(p) for p in configs], {}, started
    )
    print(f"rendered {len(configs)} sequences ({sum(counts)} frames) to {out_dir}")
    return 0


def cmd_compose_playback(args: argparse.Namespace) -> int:
    started = _utc_now()
    layout = _load_layout(args.layout)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    seq_dir = Path(args.sequence)
    annotation = read_annotation(seq_dir / "annotation.xml")
    for frame in annotation.frames:
        pixels = read_png(seq_dir / FRAME_NAME.format(index=frame.frame_index))
        canvas = compose_playback_frame(pixels, frame.frame_index, frame.label, layout)
        write_png(canvas, out_dir / FRAME_NAME.format(index=frame.frame_index))
    write_run_manifest(
        out_dir, "compose-playback", [str(seq_dir)], {}, started
    )
    print(f"composed {len(annotation.frames)} playback frames to {out_dir}")
    return 0


def cmd_rectify(args: argparse.Namespace) -> int:
    started = _utc_now()
    layout = _load_layout(args.layout)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    recording_dir = Path(args.recording)
    frame_paths = _frame_paths(recording_dir)
    images = (read_png(path) for path in frame_paths)
    source = read_annotation(args.source)
    annotation, outcomes = process_recorded_sequence(images, source, layout)

    n_ok = 0
    with open(out_dir / "skipped.txt", "w", encoding="utf-8", newline="\n") as log:
        for path, outcome in zip(frame_paths, outcomes):
            if outcome.status == STATUS_OK:
                n_ok += 1
                name = FRAME_NAME.format(index=outcome.frame_index)
                write_png(outcome.rectified, out_dir / name)
            else:
                log.write(f"{path.name}\t{outcome.status}\t{outcome.detail or ''}\n")
    if n_ok:
        write_annotation(annotation, out_dir / "annotation.xml")
    write_run_manifest(out_dir, "rectify", [str(recording_dir), args.source], {}, started)
    skipped = len(outcomes) - n_ok
    print(f"rectified {n_ok} frames, skipped {skipped} (see skipped.txt)")
    return 0 if n_ok else 1


def cmd_prep(args: argparse.Namespace) -> int:
    started = _utc_now()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sequences = _sequence_dirs(args.sequences)
    entries = []
    skipped = 0
    for seq_dir in sequences:
        annotation = read_annotation(seq_dir / "annotation.xml")
        for frame in annotation.frames:
            x, y, w, h = frame.bbox
            if w == 0 or h == 0:
                skipped += 1
                continue
            provenance = SampleProvenance(args.data_type, seq_dir.name, frame.frame_index)
            image = read_png(seq_dir / FRAME_NAME.format(index=frame.frame_index))
            sample = prep_frame(
                image, frame, provenance, args.height, use_corners=not args.use_bbox
            )
            rel_path = Path("images") / f"{provenance.sample_id}.png"
            write_png(sample.image, out_dir / rel_path)
            entries.append((str(rel_path), sample))
    write_manifest(entries, out_dir / "manifest.tsv")
    write_run_manifest(out_dir, "prep", [str(d) for d in sequences], {}, started)
    print(f"prepared {len(entries)} samples ({skipped} frames skipped) to {out_dir}")
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    started = _utc_now()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_type: dict[str, dict[str, str]] = {}
    for manifest_path in args.manifests:
        for _, label, provenance in read_manifest(manifest_path):
            samples = by_type.setdefault(provenance.data_type, {})
            samples[provenance.sample_id] = label

    fractions = tuple(int(f) for f in args.fractions.split(","))
    summary_lines = []
    for type_index, data_type in enumerate(sorted(by_type)):
        samples = by_type[data_type]
        full = make_split(
            samples,
            data_type,
            derive_seed(args.seed, type_index),
            test_fraction=args.test_fraction,
            validation_fraction=args.validation_fraction,
        )
        subsets = build_subsets(full, fractions, args.pinned)
        nested_ok, nesting_violations = verify_nesting(subsets)
        if not nested_ok:
            raise ConfigError("; ".join(nesting_violations))
        for subset_id, split in sorted(subsets.items()):
            ok, violations = verify_split(split, samples)
            if not ok:
                raise ConfigError("; ".join(violations[:5]))
            write_split(split, out_dir / data_type / f"subset_{subset_id}")
            ratio = format_ratio(len(split.train), len(full.train))
            summary_lines.append(
                f"{data_type} subset {subset_id}: train {len(split.train)} ({ratio}), "
                f"validation {len(split.validation)}, test {len(split.test)}"
            )
    summary = "\n".join(summary_lines) + "\n"
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    write_run_manifest(out_dir, "split", list(args.manifests), {"seed": args.seed}, started)
    print(summary, end="")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    started = _utc_now()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    labels = {
        provenance.sample_id: label
        for _, label, provenance in read_manifest(args.manifest)
    }
    split = read_split(args.split) if args.split else None
    report = evaluate_run(args.predictions, labels, split)
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "report.txt").write_text(report.to_table(), encoding="utf-8")
    inputs = [args.predictions, args.manifest] + ([args.split] if args.split else [])
    write_run_manifest(out_dir, "evaluate", inputs, {}, started)
    print(report.to_table(), end="")
    return 0


def cmd_print_master(args: argparse.Namespace) -> int:
    started = _utc_now()
    plate = parse_label(args.label)
    image = render_print_master(plate, dpi=args.dpi)
    out_path = Path(args.out)
    write_png(image, out_path, dpi=args.dpi)
    write_run_manifest(out_path.parent, "print-master", [], {}, started)
    print(f"wrote {image.shape[1]}x{image.shape[0]} print master to {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platesynth",
        description="Synthetic license-plate dataset pipeline.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-configs", help="draw scene configurations from a seed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", type=_resolution, default=(1920, 1080), metavar="WxH")
    p.add_argument("--scene-length", type=int, default=50)
    p.add_argument("--depth-range", type=_depth_range, default=(2.0, 8.0), metavar="LO:HI")
    p.add_argument("--preset-bank", help="JSON file with camera/light preset arrays")
    p.set_defaults(func=cmd_gen_configs)

    p = sub.add_parser("render", help="rasterize configured sequences")
    p.add_argument("--configs", nargs="+", required=True, help="config files or directories")
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=("native", "pure"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--atlas", help="glyph atlas .npz (defaults to the packaged atlas)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("compose-playback", help="embed rendered frames in playback canvases")
    p.add_argument("--sequence", required=True, help="rendered sequence directory")
    p.add_argument("--out", required=True)
    p.add_argument("--layout", help="JSON file of playback layout overrides")
    p.set_defaults(func=cmd_compose_playback)

    p = sub.add_parser("rectify", help="recover canvases from recorded frames")
    p.add_argument("--recording", required=True, help="directory of recorded PNG frames")
    p.add_argument("--source", required=True, help="source sequence annotation.xml")
    p.add_argument("--out", required=True)
    p.add_argument("--layout", help="JSON file of playback layout overrides")
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("prep", help="cut deskewed OCR crops")
    p.add_argument("--sequences", nargs="+", required=True, help="sequence directories")
    p.add_argument("--out", required=True)
    p.add_argument("--data-type", default="synthetic", choices=("synthetic", "partly_real", "real"))
    p.add_argument("--height", type=int, default=48)
    p.add_argument("--use-bbox", action="store_true", help="crop from bbox, not corners")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("split", help="build nested dataset splits")
    p.add_argument("--manifests", nargs="+", required=True, help="prep manifest files")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fractions", default="25,50,75")
    p.add_argument("--pinned", type=int, help="pinned train size for subset 0")
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--validation-fraction", type=float, default=0.1)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="score a predictions file")
    p.add_argument("--predictions", required=True, help="tab-separated id/prediction file")
    p.add_argument("--manifest", required=True, help="prep manifest with reference labels")
    p.add_argument("--split", help="split directory (restricts scoring to test members)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("print-master", help="write a dpi-tagged frontal plate image")
    p.add_argument("--label", required=True, help="plate label, e.g. B-AB123")
    p.add_argument("--out", required=True)
    p.add_argument("--dpi", type=float, default=300.0)
    p.set_defaults(func=cmd_print_master)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PlatesynthError as exc:
        summary = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
