#!/usr/bin/env python3
"""Regenerate the packaged glyph atlas asset.

Usage: python tools/make_atlas.py [output.npz]

The default output path is the in-tree package asset, so running this
after editing the stroke tables refreshes what ships with the wheel.
"""

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT / "src"))

from platesynth.glyphs import build_atlas, save_atlas  # noqa: E402


def main() -> int:
    default = REPO_ROOT / "src" / "platesynth" / "assets" / "glyph_atlas.npz"
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else default
    out_path.parent.mkdir(parents=True, exist_ok=True)
    atlas = build_atlas()
    save_atlas(atlas, out_path)
    sizes = {mask.shape for mask in atlas.masks.values()}
    print(f"wrote {len(atlas.masks)} glyph masks {sizes} to {out_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
