"""Raster representation, quantization, boundary handling and resizing.

Images are ``numpy.uint8`` arrays of shape ``(height, width, 3)`` in RGB
order. Every function here returns a new array and leaves its inputs alone.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import _kernels

FILL_MODES = ("reflect", "nearest", "wrap", "constant")

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# returned by map_index for out-of-range taps under constant fill
FILL = None


@dataclass(frozen=True)
class FillMode:
    mode: str = "reflect"
    cval: int = 0

    def __post_init__(self):
        if self.mode not in FILL_MODES:
            raise ValueError(f"unknown fill mode {self.mode!r}; expected one of {FILL_MODES}")
        if not 0 <= self.cval <= 255:
            raise ValueError("cval must be in [0, 255]")

    def __str__(self) -> str:
        return f"constant({self.cval})" if self.mode == "constant" else self.mode


def check_image(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.dtype != np.uint8:
        raise TypeError("image must be a uint8 numpy array")
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must have shape (H, W, 3) with H, W >= 1, got {img.shape}")
    return img


def new_image(width: int, height: int, fill: int = 0) -> np.ndarray:
    if width < 1 or height < 1:
        raise ValueError(f"image dimensions must be positive, got {width}x{height}")
    if not 0 <= fill <= 255:
        raise ValueError("fill must be in [0, 255]")
    return np.full((height, width, 3), fill, dtype=np.uint8)


def clamp_round(x):
    """Round half away from zero, then clamp into [0, 255].

    Works on scalars (returns ``int``) and arrays (returns ``uint8``).
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("intensity must be finite")
    if arr.ndim == 0:
        v = float(arr)
        r = math.floor(v + 0.5) if v >= 0 else math.ceil(v - 0.5)
        return min(255, max(0, r))
    out = np.empty(arr.size, dtype=np.uint8)
    _kernels.quantize_array(np.ascontiguousarray(arr).reshape(-1), out)
    return out.reshape(arr.shape)


def map_index(i: int, n: int, mode: FillMode | str):
    """Map a possibly out-of-range index onto ``[0, n)`` under ``mode``.

    Reflect duplicates the edge sample: ``d c b a | a b c d | d c b a``.
    Under constant fill any out-of-range index maps to ``FILL``.
    """
    if n < 1:
        raise ValueError("axis length must be >= 1")
    mode = mode.mode if isinstance(mode, FillMode) else mode
    if 0 <= i < n:
        return i
    if mode == "constant":
        return FILL
    if mode == "nearest":
        return 0 if i < 0 else n - 1
    if mode == "wrap":
        return i % n
    if mode == "reflect":
        m = i % (2 * n)
        return m if m < n else 2 * n - 1 - m
    raise ValueError(f"unknown fill mode {mode!r}")


def map_indices(idx: np.ndarray, n: int, mode: str) -> tuple[np.ndarray, np.ndarray | None]:
    """Vectorized ``map_index``.

    Returns ``(indices, valid)``; ``valid`` is None unless ``mode`` is
    constant, in which case invalid positions carry index 0 and must be
    replaced by the fill value.
    """
    idx = np.asarray(idx, dtype=np.int64)
    if mode == "constant":
        valid = (idx >= 0) & (idx < n)
        return np.where(valid, idx, 0), valid
    if mode == "nearest":
        return np.clip(idx, 0, n - 1), None
    if mode == "wrap":
        return np.mod(idx, n), None
    if mode == "reflect":
        m = np.mod(idx, 2 * n)
        return np.where(m < n, m, 2 * n - 1 - m), None
    raise ValueError(f"unknown fill mode {mode!r}")


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize with half-pixel centers; aspect ratio is not preserved.

    Taps beyond the border are clamped to the edge sample.
    """
    check_image(img)
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target dimensions must be positive, got {out_w}x{out_h}")
    if (out_h, out_w) == img.shape[:2]:
        return img.copy()
    return _kernels.resize_bilinear(np.ascontiguousarray(img), out_h, out_w)


def resize_short_side(img: np.ndarray, min_side: int) -> np.ndarray:
    """Upscale so the shorter side is at least ``min_side``, keeping aspect."""
    h, w = img.shape[:2]
    if min(h, w) >= min_side:
        return img
    if h <= w:
        new_h, new_w = min_side, max(min_side, math.ceil(w * min_side / h))
    else:
        new_h, new_w = max(min_side, math.ceil(h * min_side / w)), min_side
    return resize_bilinear(img, new_w, new_h)


def to_rgb(pil: Image.Image) -> np.ndarray:
    """Convert any decoded PIL image to 8-bit RGB (alpha dropped, gray replicated)."""
    if pil.mode in ("I;16", "I;16B", "I;16L", "I", "F"):
        arr = np.asarray(pil, dtype=np.float64)
        peak = 65535.0 if pil.mode.startswith("I;16") or arr.max(initial=0) > 255 else 255.0
        gray = clamp_round(arr * (255.0 / peak))
        return np.repeat(gray[:, :, None], 3, axis=2)
    if pil.mode != "RGB":
        pil = pil.convert("RGB")
    return np.array(pil, dtype=np.uint8)


def load_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as pil:
        pil.load()
        return to_rgb(pil)


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(payload, zlib.crc32(tag)) & 0xFFFFFFFF)
    )


def encode_png(img: np.ndarray) -> bytes:
    """Encode as 8-bit RGB PNG.

    Every scanline uses the Up filter and the stream is deflated with the
    run-length strategy; this is about twice as fast as Pillow's adaptive
    filtering at similar size, and the bytes are a pure function of the
    pixels.
    """
    check_image(img)
    h, w = img.shape[:2]
    rows = img.reshape(h, w * 3)
    raw = np.empty((h, w * 3 + 1), dtype=np.uint8)
    raw[:, 0] = 2
    raw[0, 1:] = rows[0]
    np.subtract(rows[1:], rows[:-1], out=raw[1:, 1:])
    deflate = zlib.compressobj(6, zlib.DEFLATED, 15, 9, zlib.Z_RLE)
    idat = deflate.compress(raw.tobytes()) + deflate.flush()
    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return PNG_SIGNATURE + _chunk(b"IHDR", header) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def save_png(img: np.ndarray, path: str | Path) -> bytes:
    data = encode_png(img)
    Path(path).write_bytes(data)
    return data
