"""Per-pixel compute kernels with a compiled and a pure NumPy backend.

The compiled extension (``_native``, Cython) is selected automatically
when importable; otherwise the pure NumPy backend runs.  Both implement
the same documented semantics and produce bit-identical float64 output,
which an equivalence test enforces.  ``set_backend`` switches explicitly
(the CLI exposes this as ``--backend``).
"""

from __future__ import annotations

import math

import numpy as np

from . import pure

try:
    from . import _native
except ImportError:
    _native = None

_BACKENDS = {"pure": pure}
if _native is not None:
    _BACKENDS["native"] = _native

_active_name = "native" if _native is not None else "pure"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def active_backend() -> str:
    return _active_name


def set_backend(name: str) -> None:
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(
            f"backend {name!r} not available; choose from {available_backends()}"
        )
    _active_name = name


def gaussian_weights(sigma: float) -> np.ndarray:
    """Normalized 1D Gaussian taps with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def warp_perspective(src, matrix, out_size, fill: float = 0.0):
    """Inverse-warp by a 3x3 matrix mapping output pixel coords to source."""
    return _BACKENDS[_active_name].warp_perspective(
        np.ascontiguousarray(src, dtype=np.float64),
        np.asarray(matrix, dtype=np.float64),
        (int(out_size[0]), int(out_size[1])),
        float(fill),
    )


def rasterize_quad(rgb, coverage, cam, quad, texture, light, ambient, region) -> None:
    """Ray-cast a textured quad into ``rgb``/``coverage`` in place.

    See ``pure.rasterize_quad`` for the parameter pack layout.
    """
    _BACKENDS[_active_name].rasterize_quad(
        rgb, coverage, cam, quad,
        np.ascontiguousarray(texture, dtype=np.float64),
        light, float(ambient), tuple(int(v) for v in region),
    )


def separable_blur(img, weights):
    """Separable convolution with edge replication (both axes, same taps)."""
    return _BACKENDS[_active_name].separable_blur(
        np.ascontiguousarray(img, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
    )


def gaussian_blur(img, sigma: float):
    """Full-frame Gaussian blur; identity below a small sigma threshold."""
    if sigma < 0.3:
        return np.array(img, dtype=np.float64, copy=True)
    return separable_blur(img, gaussian_weights(sigma))
