# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled mirrors of the pure NumPy kernels.

Semantics are defined by ``pure.py``; every arithmetic expression here
keeps the same operand grouping so float64 results are bit-identical
(the extension is compiled with FMA contraction disabled).  Change both
files together.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

# Light kind codes, same values as pure.KIND_SUN / KIND_SPOT / KIND_AREA.
cdef int KIND_SUN = 0
cdef int KIND_SPOT = 1
cdef int KIND_AREA = 2


cdef inline long _clamp_index(long idx, long upper) nogil:
    if idx < 0:
        return 0
    if idx > upper:
        return upper
    return idx


cdef inline double _sample_channel(
    const double[:, :, ::1] src, double qx, double qy, long c
) nogil:
    """Bilinear tap at index-space position (qx, qy) = pixel pos - 0.5."""
    cdef long src_h = src.shape[0]
    cdef long src_w = src.shape[1]
    cdef double x0f = floor(qx)
    cdef double y0f = floor(qy)
    cdef double fx = qx - x0f
    cdef double fy = qy - y0f
    cdef long ix0 = _clamp_index(<long>x0f, src_w - 1)
    cdef long iy0 = _clamp_index(<long>y0f, src_h - 1)
    cdef long ix1 = _clamp_index(<long>x0f + 1, src_w - 1)
    cdef long iy1 = _clamp_index(<long>y0f + 1, src_h - 1)
    cdef double v00 = src[iy0, ix0, c]
    cdef double v10 = src[iy0, ix1, c]
    cdef double v01 = src[iy1, ix0, c]
    cdef double v11 = src[iy1, ix1, c]
    cdef double w00 = (1.0 - fx) * (1.0 - fy)
    cdef double w10 = fx * (1.0 - fy)
    cdef double w01 = (1.0 - fx) * fy
    cdef double w11 = fx * fy
    return v00 * w00 + v10 * w10 + v01 * w01 + v11 * w11


def warp_perspective(src, matrix, out_size, double fill=0.0):
    cdef long out_w = out_size[0]
    cdef long out_h = out_size[1]
    src = np.ascontiguousarray(src, dtype=np.float64)
    cdef const double[:, :, ::1] src_v = src
    cdef long src_h = src_v.shape[0]
    cdef long src_w = src_v.shape[1]
    cdef long channels = src_v.shape[2]
    m = np.ascontiguousarray(matrix, dtype=np.float64).reshape(9)
    cdef const double[::1] mv = m
    out = np.empty((out_h, out_w, channels), dtype=np.float64)
    cdef double[:, :, ::1] out_v = out

    cdef long i, j, c
    cdef double xs, ys, denom, sx, sy
    cdef bint valid
    with nogil:
        for i in range(out_h):
            ys = i + 0.5
            for j in range(out_w):
                xs = j + 0.5
                denom = mv[6] * xs + mv[7] * ys + mv[8]
                if denom == 0.0:
                    for c in range(channels):
                        out_v[i, j, c] = fill
                    continue
                sx = (mv[0] * xs + mv[1] * ys + mv[2]) / denom
                sy = (mv[3] * xs + mv[4] * ys + mv[5]) / denom
                valid = (
                    sx == sx and sy == sy
                    and sx >= 0.0 and sx <= src_w
                    and sy >= 0.0 and sy <= src_h
                )
                if valid:
                    for c in range(channels):
                        out_v[i, j, c] = _sample_channel(src_v, sx - 0.5, sy - 0.5, c)
                else:
                    for c in range(channels):
                        out_v[i, j, c] = fill
    return out


def rasterize_quad(rgb, coverage, cam, quad, texture, light, double ambient, region):
    cdef double[:, :, ::1] rgb_v = rgb
    cdef unsigned char[:, ::1] cov_v = coverage
    cam_arr = np.ascontiguousarray(cam, dtype=np.float64)
    quad_arr = np.ascontiguousarray(quad, dtype=np.float64)
    light_arr = np.ascontiguousarray(light, dtype=np.float64)
    texture = np.ascontiguousarray(texture, dtype=np.float64)
    cdef const double[::1] cam_v = cam_arr
    cdef const double[::1] quad_v = quad_arr
    cdef const double[::1] light_v = light_arr
    cdef const double[:, :, ::1] tex_v = texture

    cdef long x0 = region[0]
    cdef long y0 = region[1]
    cdef long x1 = region[2]
    cdef long y1 = region[3]

    cdef double ox = cam_v[0], oy = cam_v[1], oz = cam_v[2]
    cdef double r0 = cam_v[3], r1 = cam_v[4], r2 = cam_v[5]
    cdef double r3 = cam_v[6], r4 = cam_v[7], r5 = cam_v[8]
    cdef double r6 = cam_v[9], r7 = cam_v[10], r8 = cam_v[11]
    cdef double fx_cam = cam_v[12], fy_cam = cam_v[13]
    cdef double cx = cam_v[14], cy = cam_v[15]

    cdef double q0x = quad_v[0], q0y = quad_v[1], q0z = quad_v[2]
    cdef double exx = quad_v[3], exy = quad_v[4], exz = quad_v[5]
    cdef double eyx = quad_v[6], eyy = quad_v[7], eyz = quad_v[8]

    cdef double nx = exy * eyz - exz * eyy
    cdef double ny = exz * eyx - exx * eyz
    cdef double nz = exx * eyy - exy * eyx
    cdef double g11 = exx * exx + exy * exy + exz * exz
    cdef double g12 = exx * eyx + exy * eyy + exz * eyz
    cdef double g22 = eyx * eyx + eyy * eyy + eyz * eyz
    cdef double gdet = g11 * g22 - g12 * g12
    if gdet == 0.0:
        return
    cdef double nlen = sqrt(nx * nx + ny * ny + nz * nz)
    if nlen == 0.0:
        return
    cdef double unx = nx / nlen, uny = ny / nlen, unz = nz / nlen

    cdef long tex_h = tex_v.shape[0]
    cdef long tex_w = tex_v.shape[1]
    cdef int kind = <int>light_v[0]
    cdef double lpx = light_v[1], lpy = light_v[2], lpz = light_v[3]
    cdef double ldx = light_v[4], ldy = light_v[5], ldz = light_v[6]
    cdef double intensity = light_v[7]
    cdef double cos_outer = light_v[8]
    cdef double cos_inner = light_v[9]

    cdef double tnum = nx * (q0x - ox) + ny * (q0y - oy) + nz * (q0z - oz)

    cdef long i, j, c
    cdef double xs, ys, dcx, dcy, dwx, dwy, dwz, denom, t
    cdef double px, py, pz, rx, ry, rz, a1, a2, u, v
    cdef double to_cam, sign, snx, sny, snz
    cdef double lx, ly, lz, atten, cone, lvx, lvy, lvz, dist_sq, inv_dist
    cdef double cos_ang, edge, ndotl, ndotl_pos, shade, tex_x, tex_y, sample

    with nogil:
        for i in range(y0, y1):
            ys = i + 0.5
            for j in range(x0, x1):
                xs = j + 0.5
                dcx = (xs - cx) / fx_cam
                dcy = -(ys - cy) / fy_cam
                dwx = r0 * dcx + r1 * dcy + r2
                dwy = r3 * dcx + r4 * dcy + r5
                dwz = r6 * dcx + r7 * dcy + r8

                denom = nx * dwx + ny * dwy + nz * dwz
                if denom == 0.0:
                    continue
                t = tnum / denom
                if not (t == t and t > 1e-9):
                    continue

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
                if not (u >= 0.0 and u <= 1.0 and v >= 0.0 and v <= 1.0):
                    continue

                to_cam = unx * (ox - px) + uny * (oy - py) + unz * (oz - pz)
                if to_cam >= 0.0:
                    sign = 1.0
                else:
                    sign = -1.0
                snx = unx * sign
                sny = uny * sign
                snz = unz * sign

                if kind == KIND_SUN:
                    lx = -ldx
                    ly = -ldy
                    lz = -ldz
                    atten = 1.0
                    cone = 1.0
                else:
                    lvx = lpx - px
                    lvy = lpy - py
                    lvz = lpz - pz
                    dist_sq = lvx * lvx + lvy * lvy + lvz * lvz
                    inv_dist = 1.0 / sqrt(dist_sq)
                    atten = 1.0 / dist_sq
                    lx = lvx * inv_dist
                    ly = lvy * inv_dist
                    lz = lvz * inv_dist
                    if kind == KIND_SPOT:
                        cos_ang = -(lx * ldx + ly * ldy + lz * ldz)
                        edge = (cos_ang - cos_outer) / (cos_inner - cos_outer)
                        if edge < 0.0:
                            edge = 0.0
                        elif edge > 1.0:
                            edge = 1.0
                        cone = edge * edge * (3.0 - 2.0 * edge)
                    else:
                        cone = 1.0

                ndotl = snx * lx + sny * ly + snz * lz
                if ndotl > 0.0:
                    ndotl_pos = ndotl
                else:
                    ndotl_pos = 0.0
                shade = ambient + intensity * ndotl_pos * atten * cone

                tex_x = u * tex_w
                tex_y = v * tex_h
                for c in range(3):
                    sample = _sample_channel(tex_v, tex_x - 0.5, tex_y - 0.5, c)
                    rgb_v[i, j, c] = sample * shade
                cov_v[i, j] = 1


def separable_blur(img, weights):
    img = np.ascontiguousarray(img, dtype=np.float64)
    w_arr = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, :, ::1] img_v = img
    cdef const double[::1] w_v = w_arr
    cdef long taps = w_v.shape[0]
    cdef long radius = (taps - 1) // 2
    cdef long h = img_v.shape[0]
    cdef long w = img_v.shape[1]
    cdef long channels = img_v.shape[2]

    horiz = np.zeros((h, w, channels), dtype=np.float64)
    out = np.zeros((h, w, channels), dtype=np.float64)
    cdef double[:, :, ::1] horiz_v = horiz
    cdef double[:, :, ::1] out_v = out

    cdef long i, j, c, k, src_idx
    cdef double acc
    with nogil:
        for i in range(h):
            for j in range(w):
                for c in range(channels):
                    acc = 0.0
                    for k in range(taps):
                        src_idx = _clamp_index(j + k - radius, w - 1)
                        acc += w_v[k] * img_v[i, src_idx, c]
                    horiz_v[i, j, c] = acc
        for i in range(h):
            for j in range(w):
                for c in range(channels):
                    acc = 0.0
                    for k in range(taps):
                        src_idx = _clamp_index(i + k - radius, h - 1)
                        acc += w_v[k] * horiz_v[src_idx, j, c]
                    out_v[i, j, c] = acc
    return out
