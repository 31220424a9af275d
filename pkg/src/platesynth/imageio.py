"""Thin PNG read/write helpers around Pillow.

All images in this package are uint8 RGB arrays of shape (H, W, 3).
Print masters carry a physical resolution so the pixel grid maps back
to millimetres when printed; the dpi pair is stored in the PNG pHYs
metadata.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import AssetError


def write_png(image: np.ndarray, path, dpi: float | None = None) -> None:
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise AssetError(f"expected uint8 image, got {image.dtype}")
    if image.ndim == 2:
        image = np.repeat(image[:, :, None], 3, axis=2)
    if image.ndim != 3 or image.shape[2] != 3:
        raise AssetError(f"expected (H, W, 3) image, got shape {image.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pil = Image.fromarray(image, mode="RGB")
    if dpi is not None:
        pil.save(path, format="PNG", dpi=(float(dpi), float(dpi)))
    else:
        pil.save(path, format="PNG")


def read_png(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise AssetError(f"no such image file: {path}")
    with Image.open(path) as pil:
        return np.asarray(pil.convert("RGB"), dtype=np.uint8)


def read_png_dpi(path) -> float | None:
    """Horizontal physical resolution recorded in the file, if any."""
    path = Path(path)
    with Image.open(path) as pil:
        dpi = pil.info.get("dpi")
    if dpi is None:
        return None
    return float(dpi[0])
