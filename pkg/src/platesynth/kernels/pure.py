"""Pure NumPy implementations of the per-pixel kernels.

This backend is the reference semantics; the compiled backend mirrors it
expression by expression (same operand grouping, no fused multiply-add) so
the two produce bit-identical float64 results.  Anything changed here must
be changed in ``_native.pyx`` the same way.

Shared conventions:

* Pixel (row i, column j) spans [j, j+1) x [i, i+1); its center is
  (j + 0.5, i + 0.5).  Continuous positions are in these pixel units.
* Bilinear sampling at position p reads the four texels around index
  p - 0.5, clamping tap indices to the image (edge replication).  Warp
  positions strictly outside [0, W] x [0, H] produce the fill value.
* Accumulation order in blurs is ascending tap index.
"""

from __future__ import annotations

import numpy as np

# Output rows processed per vectorized chunk; bounds peak memory without
# changing results (all math is elementwise).
_CHUNK_ROWS = 512

KIND_SUN = 0
KIND_SPOT = 1
KIND_AREA = 2


def warp_perspective(
    src: np.ndarray,
    matrix: np.ndarray,
    out_size: tuple[int, int],
    fill: float = 0.0,
) -> np.ndarray:
    """Inverse-warp ``src`` by a 3x3 matrix mapping output pixels to source.

    ``src`` is float64 (H, W, C); ``matrix`` maps homogeneous output pixel
    coordinates (x, y, 1) in pixel units to source pixel coordinates.
    """
    out_w, out_h = out_size
    src_h, src_w = src.shape[0], src.shape[1]
    channels = src.shape[2]
    out = np.empty((out_h, out_w, channels), dtype=np.float64)
    m = np.asarray(matrix, dtype=np.float64)

    for y0 in range(0, out_h, _CHUNK_ROWS):
        y1 = min(y0 + _CHUNK_ROWS, out_h)
        ys, xs = np.meshgrid(
            np.arange(y0, y1, dtype=np.float64) + 0.5,
            np.arange(out_w, dtype=np.float64) + 0.5,
            indexing="ij",
        )
        denom = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            sx = (m[0, 0] * xs + m[0, 1] * ys + m[0, 2]) / denom
            sy = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) / denom
        valid = (
            np.isfinite(sx)
            & np.isfinite(sy)
            & (sx >= 0.0)
            & (sx <= src_w)
            & (sy >= 0.0)
            & (sy <= src_h)
        )
        sx = np.where(valid, sx, 0.0)
        sy = np.where(valid, sy, 0.0)
        sampled = _sample_bilinear(src, sx, sy)
        block = np.where(valid[..., None], sampled, fill)
        out[y0:y1] = block
    return out


def _sample_bilinear(src: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear sample at positions (xs, ys) in pixel units, edges clamped."""
    src_h, src_w = src.shape[0], src.shape[1]
    qx = xs - 0.5
    qy = ys - 0.5
    x0 = np.floor(qx)
    y0 = np.floor(qy)
    fx = qx - x0
    fy = qy - y0
    ix0 = np.clip(x0.astype(np.int64), 0, src_w - 1)
    iy0 = np.clip(y0.astype(np.int64), 0, src_h - 1)
    ix1 = np.clip(x0.astype(np.int64) + 1, 0, src_w - 1)
    iy1 = np.clip(y0.astype(np.int64) + 1, 0, src_h - 1)
    v00 = src[iy0, ix0]
    v10 = src[iy0, ix1]
    v01 = src[iy1, ix0]
    v11 = src[iy1, ix1]
    w00 = ((1.0 - fx) * (1.0 - fy))[..., None]
    w10 = (fx * (1.0 - fy))[..., None]
    w01 = ((1.0 - fx) * fy)[..., None]
    w11 = (fx * fy)[..., None]
    return v00 * w00 + v10 * w10 + v01 * w01 + v11 * w11


def rasterize_quad(
    rgb: np.ndarray,
    coverage: np.ndarray,
    cam: np.ndarray,
    quad: np.ndarray,
    texture: np.ndarray,
    light: np.ndarray,
    ambient: float,
    region: tuple[int, int, int, int],
) -> None:
    """Ray-cast one textured quad into ``rgb`` (in place) over ``region``.

    Parameter packs (float64 arrays):

    * cam (16): origin xyz, camera-to-world rotation row-major (9),
      fx, fy, cx, cy.
    * quad (9): top-left corner xyz, full width edge vector xyz, full
      height edge vector xyz (texture v grows along it).
    * light (10): kind code, position xyz, direction xyz (unit, points
      from the light into the scene), intensity, cos outer cone,
      cos inner cone.

    Shading is Lambertian with constant ambient; the quad normal is
    flipped toward the camera.  Pixels whose view ray misses the quad are
    left untouched; hits additionally set ``coverage`` (uint8).
    """
    x0, y0, x1, y1 = region
    ox, oy, oz = cam[0], cam[1], cam[2]
    r = cam[3:12]
    fx_cam, fy_cam, cx, cy = cam[12], cam[13], cam[14], cam[15]
    q0x, q0y, q0z = quad[0], quad[1], quad[2]
    exx, exy, exz = quad[3], quad[4], quad[5]
    eyx, eyy, eyz = quad[6], quad[7], quad[8]

    # Plane normal ex x ey and the Gram inverse for (u, v) recovery.
    nx = exy * eyz - exz * eyy
    ny = exz * eyx - exx * eyz
    nz = exx * eyy - exy * eyx
    g11 = exx * exx + exy * exy + exz * exz
    g12 = exx * eyx + exy * eyy + exz * eyz
    g22 = eyx * eyx + eyy * eyy + eyz * eyz
    gdet = g11 * g22 - g12 * g12
    if gdet == 0.0:
        return
    nlen = np.sqrt(nx * nx + ny * ny + nz * nz)
    if nlen == 0.0:
        return
    unx, uny, unz = nx / nlen, ny / nlen, nz / nlen

    tex_h, tex_w = texture.shape[0], texture.shape[1]
    kind = int(light[0])
    lpx, lpy, lpz = light[1], light[2], light[3]
    ldx, ldy, ldz = light[4], light[5], light[6]
    intensity = light[7]
    cos_outer = light[8]
    cos_inner = light[9]

    for row0 in range(y0, y1, _CHUNK_ROWS):
        row1 = min(row0 + _CHUNK_ROWS, y1)
        ys, xs = np.meshgrid(
            np.arange(row0, row1, dtype=np.float64) + 0.5,
            np.arange(x0, x1, dtype=np.float64) + 0.5,
            indexing="ij",
        )
        # View ray in world coordinates.
        dcx = (xs - cx) / fx_cam
        dcy = -(ys - cy) / fy_cam
        dwx = r[0] * dcx + r[1] * dcy + r[2]
        dwy = r[3] * dcx + r[4] * dcy + r[5]
        dwz = r[6] * dcx + r[7] * dcy + r[8]

        denom = nx * dwx + ny * dwy + nz * dwz
        tnum = nx * (q0x - ox) + ny * (q0y - oy) + nz * (q0z - oz)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = tnum / denom
        hit = np.isfinite(t) & (t > 1e-9)

        px = ox + t * dwx
        py = oy + t * dwy
        pz = oz + t * dwz
        rx = px - q0x
        ry = py - q0y
        rz = pz - q0z
        a1 = rx * exx + ry * exy + rz * exz
        a2 = rx * eyx + ry * eyy + rz * eyz
        u = (g22 * a1 - g12 * a2) / gdet
        v = (g11 * a2 - g12 * a1) / gdet
        hit &= (u >= 0.0) & (u <= 1.0) & (v >= 0.0) & (v <= 1.0)
        if not hit.any():
            continue

        # Normal flipped toward the camera at each hit point.
        to_cam = unx * (ox - px) + uny * (oy - py) + unz * (oz - pz)
        sign = np.where(to_cam >= 0.0, 1.0, -1.0)
        snx = unx * sign
        sny = uny * sign
        snz = unz * sign

        if kind == KIND_SUN:
            lx = np.full_like(px, -ldx)
            ly = np.full_like(px, -ldy)
            lz = np.full_like(px, -ldz)
            atten = np.ones_like(px)
            cone = np.ones_like(px)
        else:
            lvx = lpx - px
            lvy = lpy - py
            lvz = lpz - pz
            dist_sq = lvx * lvx + lvy * lvy + lvz * lvz
            with np.errstate(divide="ignore", invalid="ignore"):
                inv_dist = 1.0 / np.sqrt(dist_sq)
                atten = 1.0 / dist_sq
            lx = lvx * inv_dist
            ly = lvy * inv_dist
            lz = lvz * inv_dist
            if kind == KIND_SPOT:
                cos_ang = -(lx * ldx + ly * ldy + lz * ldz)
                edge = np.clip((cos_ang - cos_outer) / (cos_inner - cos_outer), 0.0, 1.0)
                cone = edge * edge * (3.0 - 2.0 * edge)
            else:
                cone = np.ones_like(px)

        ndotl = snx * lx + sny * ly + snz * lz
        shade = ambient + intensity * np.maximum(ndotl, 0.0) * atten * cone

        tex_x = np.where(hit, u * tex_w, 0.0)
        tex_y = np.where(hit, v * tex_h, 0.0)
        sampled = _sample_bilinear(texture, tex_x, tex_y)
        shaded = sampled * shade[..., None]

        yy, xx = np.nonzero(hit)
        rgb[yy + row0, xx + x0] = shaded[yy, xx]
        coverage[yy + row0, xx + x0] = 1


def separable_blur(img: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Separable convolution with edge replication, horizontal then vertical."""
    radius = (len(weights) - 1) // 2
    h, w = img.shape[0], img.shape[1]

    padded = np.pad(img, ((0, 0), (radius, radius), (0, 0)), mode="edge")
    horiz = np.zeros_like(img)
    for k in range(len(weights)):
        horiz += weights[k] * padded[:, k : k + w]

    padded = np.pad(horiz, ((radius, radius), (0, 0), (0, 0)), mode="edge")
    out = np.zeros_like(img)
    for k in range(len(weights)):
        out += weights[k] * padded[k : k + h]
    return out
