"""Compiled inner loops for the per-pixel hot paths.

Fill modes are passed as integer codes (see ``FILL_CODES``); ``-1`` from
``_map`` means "use the constant fill value".
"""

from __future__ import annotations

import math

import numba
import numpy as np

FILL_CODES = {"reflect": 0, "nearest": 1, "wrap": 2, "constant": 3}

_SNAP = 1e-9


@numba.njit(cache=True, inline="always")
def _map(i, n, mode):
    if 0 <= i < n:
        return i
    if mode == 3:
        return -1
    if mode == 1:
        return 0 if i < 0 else n - 1
    if mode == 2:
        r = i % n
        return r + n if r < 0 else r
    m = i % (2 * n)
    if m < 0:
        m += 2 * n
    return m if m < n else 2 * n - 1 - m


@numba.njit(cache=True, inline="always")
def _snap(v):
    r = math.floor(v + 0.5)
    return r if abs(v - r) < _SNAP else v


@numba.njit(cache=True, inline="always")
def _quantize(v):
    r = math.floor(v + 0.5) if v >= 0.0 else math.ceil(v - 0.5)
    if r < 0.0:
        return 0
    if r > 255.0:
        return 255
    return int(r)


@numba.njit(cache=True)
def quantize_array(flat, out):
    for i in range(flat.shape[0]):
        out[i] = _quantize(flat[i])


@numba.njit(cache=True)
def warp_nearest(img, inv, mode, cval, out):
    h, w = img.shape[0], img.shape[1]
    for y in range(h):
        for x in range(w):
            sx = _snap(inv[0, 0] * x + inv[0, 1] * y + inv[0, 2])
            sy = _snap(inv[1, 0] * x + inv[1, 1] * y + inv[1, 2])
            ix = _map(int(math.floor(sx + 0.5)), w, mode)
            iy = _map(int(math.floor(sy + 0.5)), h, mode)
            if ix < 0 or iy < 0:
                for c in range(3):
                    out[y, x, c] = cval
            else:
                for c in range(3):
                    out[y, x, c] = img[iy, ix, c]


@numba.njit(cache=True)
def warp_bilinear(img, inv, mode, cval, out):
    h, w = img.shape[0], img.shape[1]
    fv = float(cval)
    for y in range(h):
        for x in range(w):
            sx = _snap(inv[0, 0] * x + inv[0, 1] * y + inv[0, 2])
            sy = _snap(inv[1, 0] * x + inv[1, 1] * y + inv[1, 2])
            x0f = math.floor(sx)
            y0f = math.floor(sy)
            ax = sx - x0f
            ay = sy - y0f
            x0 = int(x0f)
            y0 = int(y0f)
            ix0 = _map(x0, w, mode)
            ix1 = _map(x0 + 1, w, mode)
            iy0 = _map(y0, h, mode)
            iy1 = _map(y0 + 1, h, mode)
            for c in range(3):
                v00 = fv if (ix0 < 0 or iy0 < 0) else float(img[iy0, ix0, c])
                v01 = fv if (ix1 < 0 or iy0 < 0) else float(img[iy0, ix1, c])
                v10 = fv if (ix0 < 0 or iy1 < 0) else float(img[iy1, ix0, c])
                v11 = fv if (ix1 < 0 or iy1 < 0) else float(img[iy1, ix1, c])
                top = (1.0 - ax) * v00 + ax * v01
                bottom = (1.0 - ax) * v10 + ax * v11
                out[y, x, c] = _quantize((1.0 - ay) * top + ay * bottom)


@numba.njit(cache=True)
def _axis_taps(n_in, n_out):
    i0 = np.empty(n_out, np.int64)
    i1 = np.empty(n_out, np.int64)
    frac = np.empty(n_out, np.float64)
    scale = n_in / n_out
    for k in range(n_out):
        s = (k + 0.5) * scale - 0.5
        if s < 0.0:
            s = 0.0
        if s > n_in - 1:
            s = float(n_in - 1)
        a = int(math.floor(s))
        i0[k] = a
        i1[k] = min(a + 1, n_in - 1)
        frac[k] = s - a
    return i0, i1, frac


@numba.njit(cache=True)
def resize_bilinear(img, out_h, out_w):
    h, w = img.shape[0], img.shape[1]
    y0, y1, fy = _axis_taps(h, out_h)
    x0, x1, fx = _axis_taps(w, out_w)
    out = np.empty((out_h, out_w, 3), np.uint8)
    for y in range(out_h):
        a = fy[y]
        for x in range(out_w):
            b = fx[x]
            for c in range(3):
                top = img[y0[y], x0[x], c] * (1.0 - b) + img[y0[y], x1[x], c] * b
                bottom = img[y1[y], x0[x], c] * (1.0 - b) + img[y1[y], x1[x], c] * b
                out[y, x, c] = _quantize(top * (1.0 - a) + bottom * a)
    return out


_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U45 = np.uint64(45)
_U57 = np.uint64(57)
_U19 = np.uint64(19)
_INV53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi


@numba.njit(cache=True, inline="always")
def _next(s):
    s1 = s[1]
    x = s1 * _U5
    x = (x << _U7) | (x >> _U57)
    result = x * _U9
    t = s1 << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U45) | (s[3] >> _U19)
    return result


@numba.njit(cache=True)
def fill_u64(state, out):
    for i in range(out.shape[0]):
        out[i] = _next(state)


@numba.njit(cache=True)
def fill_normal(state, out):
    """Box-Muller: pair (u1, u2) -> r*cos(2*pi*u2), r*sin(2*pi*u2)."""
    n = out.shape[0]
    k = 0
    while k < n:
        u1 = float(_next(state) >> _U11) * _INV53
        u2 = float(_next(state) >> _U11) * _INV53
        r = math.sqrt(-2.0 * math.log1p(-u1))
        theta = _TWO_PI * u2
        out[k] = r * math.cos(theta)
        if k + 1 < n:
            out[k + 1] = r * math.sin(theta)
        k += 2


@numba.njit(cache=True)
def add_noise(state, flat, deviation, out):
    """``out = quantize(flat + deviation * z)`` with z drawn as in ``fill_normal``."""
    n = flat.shape[0]
    k = 0
    while k < n:
        u1 = float(_next(state) >> _U11) * _INV53
        u2 = float(_next(state) >> _U11) * _INV53
        r = math.sqrt(-2.0 * math.log1p(-u1))
        theta = _TWO_PI * u2
        out[k] = _quantize(flat[k] + deviation * (r * math.cos(theta)))
        if k + 1 < n:
            out[k + 1] = _quantize(flat[k + 1] + deviation * (r * math.sin(theta)))
        k += 2
