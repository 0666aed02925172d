"""Additive Gaussian noise and salt-and-pepper corruption."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import check_image
from .rng import RandomStream

DEFAULT_VARIABILITY = 50.0


@dataclass(frozen=True)
class SaltPepperParams:
    amount: float = 0.05
    salt_ratio: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.amount <= 1.0:
            raise ValueError("salt-and-pepper amount must be in [0, 1]")
        if not 0.0 <= self.salt_ratio <= 1.0:
            raise ValueError("salt ratio must be in [0, 1]")


def draw_deviation(variability: float, rng: RandomStream) -> float:
    """Per-image standard deviation, ``variability * U[0, 1)``."""
    if not variability >= 0:
        raise ValueError(f"variability must be non-negative, got {variability}")
    return variability * rng.random()


def gaussian_noise(img: np.ndarray, deviation: float, rng: RandomStream) -> np.ndarray:
    """Add independent N(0, deviation^2) noise to every channel value."""
    check_image(img)
    if not deviation >= 0:
        raise ValueError(f"deviation must be non-negative, got {deviation}")
    if deviation == 0:
        return img.copy()
    # fused equivalent of clamp_round(img + deviation * rng.normal_array(img.size))
    out = np.empty(img.size, dtype=np.uint8)
    with rng._kernel_state() as st:
        _kernels.add_noise(st, img.reshape(-1).astype(np.float64), float(deviation), out)
    return out.reshape(img.shape)


def add_gaussian_noise(img: np.ndarray, variability: float, rng: RandomStream) -> np.ndarray:
    return gaussian_noise(img, draw_deviation(variability, rng), rng)


def salt_pepper_masks(
    height: int, width: int, params: SaltPepperParams, rng: RandomStream
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(corrupted, salt)`` boolean masks.

    Two uniforms per pixel in row-major order: the first decides
    corruption, the second salt versus pepper.
    """
    u = rng.random_array(2 * height * width).reshape(height, width, 2)
    corrupted = u[:, :, 0] < params.amount
    salt = corrupted & (u[:, :, 1] < params.salt_ratio)
    return corrupted, salt


def add_salt_pepper(img: np.ndarray, params: SaltPepperParams, rng: RandomStream) -> np.ndarray:
    check_image(img)
    corrupted, salt = salt_pepper_masks(img.shape[0], img.shape[1], params, rng)
    out = img.copy()
    out[corrupted] = 0
    out[salt] = 255
    return out
