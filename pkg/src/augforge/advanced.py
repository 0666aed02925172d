"""Random erasing, PatchShuffle and SamplePairing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import check_image, clamp_round, resize_short_side
from .rng import RandomStream

ERASE_FILL_POLICIES = ("random", "mean", "constant")
ERASE_MAX_ATTEMPTS = 100
DEFAULT_CROP = 224


@dataclass(frozen=True)
class EraseParams:
    area_lo: float = 0.02
    area_hi: float = 0.4
    aspect_lo: float = 0.3
    aspect_hi: float = 3.33
    fill_policy: str = "random"
    cval: int = 0

    def __post_init__(self):
        if not 0 < self.area_lo <= self.area_hi <= 1:
            raise ValueError("erase area bounds must satisfy 0 < lo <= hi <= 1")
        if not 0 < self.aspect_lo <= self.aspect_hi:
            raise ValueError("erase aspect bounds must satisfy 0 < lo <= hi")
        if self.fill_policy not in ERASE_FILL_POLICIES:
            raise ValueError(f"unknown erase fill policy {self.fill_policy!r}")
        if not 0 <= self.cval <= 255:
            raise ValueError("erase cval must be in [0, 255]")


class Rect(NamedTuple):
    x: int
    y: int
    w: int
    h: int

    @property
    def area(self) -> int:
        return self.w * self.h

    def mask(self, height: int, width: int) -> np.ndarray:
        m = np.zeros((height, width), dtype=bool)
        m[self.y : self.y + self.h, self.x : self.x + self.w] = True
        return m


@dataclass(frozen=True)
class PatchShuffleParams:
    n: int = 2
    p: float = 0.05

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("window side must be >= 1")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("shuffle probability must be in [0, 1]")


def sample_erase_rect(height: int, width: int, params: EraseParams, rng: RandomStream) -> Rect | None:
    """Draw a rectangle with area fraction and aspect (h / w) within bounds.

    Retries up to ``ERASE_MAX_ATTEMPTS`` times; None when nothing fits.
    """
    total = height * width
    for _ in range(ERASE_MAX_ATTEMPTS):
        area = rng.uniform(params.area_lo, params.area_hi) * total
        aspect = rng.uniform(params.aspect_lo, params.aspect_hi)
        h = int(round(math.sqrt(area * aspect)))
        w = int(round(math.sqrt(area / aspect)))
        if 1 <= h <= height and 1 <= w <= width:
            x = rng.below(width - w + 1)
            y = rng.below(height - h + 1)
            return Rect(x, y, w, h)
    return None


def erase_rect(img: np.ndarray, rect: Rect, params: EraseParams, rng: RandomStream) -> np.ndarray:
    check_image(img)
    out = img.copy()
    x, y, w, h = rect
    if params.fill_policy == "random":
        out[y : y + h, x : x + w] = rng.byte_array(h * w * 3).reshape(h, w, 3)
    elif params.fill_policy == "mean":
        out[y : y + h, x : x + w] = clamp_round(img.reshape(-1, 3).mean(axis=0))
    else:
        out[y : y + h, x : x + w] = params.cval
    return out


def random_erase(
    img: np.ndarray, params: EraseParams, rng: RandomStream
) -> tuple[np.ndarray, Rect | None]:
    """Overwrite one random rectangle.

    Returns the new image and the erased rectangle; the rectangle is None
    (and the image an unchanged copy) when no feasible rectangle was found.
    """
    check_image(img)
    rect = sample_erase_rect(img.shape[0], img.shape[1], params, rng)
    if rect is None:
        return img.copy(), None
    return erase_rect(img, rect, params, rng), rect


def patch_shuffle_with_flags(
    img: np.ndarray, params: PatchShuffleParams, rng: RandomStream
) -> tuple[np.ndarray, np.ndarray]:
    """PatchShuffle that also reports which windows were drawn for shuffling.

    One uniform per window is drawn first (row-major window order); each
    flagged window then gets a Fisher-Yates permutation of its pixels.
    """
    check_image(img)
    h, w = img.shape[:2]
    n = params.n
    rows, cols = -(-h // n), -(-w // n)
    flags = (rng.random_array(rows * cols) < params.p).reshape(rows, cols)
    out = img.copy()
    for r, c in zip(*np.nonzero(flags)):
        y0, x0 = r * n, c * n
        window = out[y0 : y0 + n, x0 : x0 + n]
        pixels = window.reshape(-1, 3).copy()
        k = len(pixels)
        perm = list(range(k))
        for i in range(k - 1, 0, -1):
            j = rng.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        window[...] = pixels[perm].reshape(window.shape)
    return out, flags


def patch_shuffle(img: np.ndarray, params: PatchShuffleParams, rng: RandomStream) -> np.ndarray:
    return patch_shuffle_with_flags(img, params, rng)[0]


class PairingDraw(NamedTuple):
    a_x: int
    a_y: int
    a_flip: bool
    b_x: int
    b_y: int
    b_flip: bool


def prepare_for_pairing(img: np.ndarray, crop: int) -> np.ndarray:
    return resize_short_side(check_image(img), crop)


def draw_pairing(a_shape, b_shape, crop: int, rng: RandomStream) -> PairingDraw:
    """Crop offsets and flips for both inputs; shapes are after pre-resize."""
    draws = []
    for shape in (a_shape, b_shape):
        x = rng.below(shape[1] - crop + 1)
        y = rng.below(shape[0] - crop + 1)
        draws += [x, y, rng.bernoulli(0.5)]
    return PairingDraw(*draws)


def pair_images(a: np.ndarray, b: np.ndarray, crop: int, draw: PairingDraw) -> np.ndarray:
    """Average two pre-resized images after the cuts and flips in ``draw``."""
    ca = a[draw.a_y : draw.a_y + crop, draw.a_x : draw.a_x + crop]
    cb = b[draw.b_y : draw.b_y + crop, draw.b_x : draw.b_x + crop]
    if draw.a_flip:
        ca = ca[:, ::-1]
    if draw.b_flip:
        cb = cb[:, ::-1]
    return clamp_round((ca.astype(np.float64) + cb.astype(np.float64)) * 0.5)


def sample_pairing(
    a: np.ndarray, b: np.ndarray, crop: int = DEFAULT_CROP, rng: RandomStream | None = None
) -> np.ndarray:
    """Mix two images: independent random crop and 50% mirror each, then average."""
    if crop < 1:
        raise ValueError("crop must be >= 1")
    if rng is None:
        raise ValueError("a RandomStream is required")
    a = prepare_for_pairing(a, crop)
    b = prepare_for_pairing(b, crop)
    return pair_images(a, b, crop, draw_pairing(a.shape, b.shape, crop, rng))
