"""Brightness scaling, channel isolation and 3x3 kernel filters."""

from __future__ import annotations

import numpy as np

from .core import FillMode, check_image, clamp_round, map_indices

CHANNELS = {"R": 0, "G": 1, "B": 2}

BOX_BLUR = np.full((3, 3), 1.0 / 9.0)
GAUSSIAN_BLUR = np.array([[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]]) / 16.0
SHARPEN = np.array([[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]])
IDENTITY_KERNEL = np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])

KERNELS = {
    "box": BOX_BLUR,
    "gaussian": GAUSSIAN_BLUR,
    "sharpen": SHARPEN,
    "identity": IDENTITY_KERNEL,
}


def adjust_brightness(img: np.ndarray, factor: float) -> np.ndarray:
    """Scale every intensity by ``factor`` (0 gives black) and clamp."""
    check_image(img)
    if not factor >= 0:
        raise ValueError(f"brightness factor must be non-negative, got {factor}")
    if factor == 1.0:
        return img.copy()
    return clamp_round(img.astype(np.float64) * factor)


def isolate_channel(img: np.ndarray, channel: str | int) -> np.ndarray:
    check_image(img)
    if isinstance(channel, str):
        try:
            channel = CHANNELS[channel.upper()]
        except KeyError:
            raise ValueError(f"unknown channel {channel!r}; expected R, G or B") from None
    if channel not in (0, 1, 2):
        raise ValueError(f"channel index must be 0, 1 or 2, got {channel}")
    out = np.zeros_like(img)
    out[:, :, channel] = img[:, :, channel]
    return out


def convolve3(img: np.ndarray, kernel, fill: FillMode | None = None) -> np.ndarray:
    """Per-channel 3x3 correlation (the kernel is not flipped).

    Taps outside the image are resolved through the fill mode, so the
    output keeps the input size.
    """
    check_image(img)
    k = np.asarray(kernel, dtype=np.float64)
    if k.shape != (3, 3) or not np.all(np.isfinite(k)):
        raise ValueError("kernel must be a finite 3x3 matrix")
    fill = fill or FillMode()
    h, w = img.shape[:2]
    src = img.astype(np.float64)
    acc = np.zeros_like(src)
    for dy in (-1, 0, 1):
        iy, vy = map_indices(np.arange(h) + dy, h, fill.mode)
        for dx in (-1, 0, 1):
            weight = k[dy + 1, dx + 1]
            if weight == 0.0:
                continue
            ix, vx = map_indices(np.arange(w) + dx, w, fill.mode)
            tap = src[iy][:, ix]
            if fill.mode == "constant":
                tap[~(vy[:, None] & vx[None, :])] = float(fill.cval)
            acc += weight * tap
    return clamp_round(acc)
