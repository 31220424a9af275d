"""Timing comparison of the compiled and pure-python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]

Each task runs on identical inputs per backend; the table reports the
best wall time of N runs and the pure/native ratio.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from platesynth import kernels
from platesynth.camera import rotation_matrix
from platesynth.kernels import pure


def _cam_pack(position, tilt, fx, fy, cx, cy):
    rot = rotation_matrix(tilt)
    return np.concatenate(
        [np.asarray(position, dtype=np.float64), rot.reshape(9), [fx, fy, cx, cy]]
    )


def _sun_pack(direction, intensity=1.0):
    half = math.pi / 4.0
    return np.array(
        [float(pure.KIND_SUN), 0.0, 0.0, 0.0, *direction, intensity, math.cos(half), math.cos(0.8 * half)]
    )


def _bench(fn, repeats: int) -> float:
    fn()  # warm-up, excluded
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def task_warp(backend):
    rng = np.random.default_rng(1)
    src = rng.random((2160, 3840, 3))
    matrix = np.array(
        [[1.01, 0.02, -14.0], [-0.015, 0.99, 9.0], [1.5e-6, -2.0e-6, 1.0]]
    )
    return lambda: backend.warp_perspective(src, matrix, (3840, 2160), 0.0)


def task_rasterize(backend):
    rng = np.random.default_rng(2)
    texture = rng.random((440, 2080, 3))
    cam = _cam_pack((0.0, 1.0, 0.0), (-0.04, 0.03, 0.01), 622.0, 622.0, 320.0, 180.0)
    quad = np.array([-0.26, 1.15, 1.4, 0.52, 0.01, 0.05, 0.005, -0.11, 0.01])
    light = _sun_pack((0.0, -0.6, 0.8))
    rgb = np.zeros((360, 640, 3))
    coverage = np.zeros((360, 640), dtype=np.uint8)

    def run():
        rgb.fill(0.0)
        coverage.fill(0)
        backend.rasterize_quad(rgb, coverage, cam, quad, texture, light, 0.15, (0, 0, 640, 360))

    return run


def task_blur(backend):
    rng = np.random.default_rng(3)
    img = rng.random((1080, 1920, 3))
    weights = kernels.gaussian_weights(1.8)
    return lambda: backend.separable_blur(img, weights)


TASKS = [
    ("warp_perspective 3840x2160", task_warp),
    ("rasterize_quad   640x360", task_rasterize),
    ("separable_blur   1920x1080", task_blur),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {kernels.active_backend()})")
    header = f"{'task':<28}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) > 1:
        header += f"{'pure/native':>14}"
    print(header)
    for label, make in TASKS:
        times = {}
        for name in backends:
            kernels.set_backend(name)
            backend = pure if name == "pure" else __import__(
                "platesynth.kernels._native", fromlist=["_native"]
            )
            times[name] = _bench(make(backend), args.repeats)
        row = f"{label:<28}" + "".join(f"{times[n] * 1e3:>10.1f}ms" for n in backends)
        if "native" in times and "pure" in times:
            row += f"{times['pure'] / times['native']:>13.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
