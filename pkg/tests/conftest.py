from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from PIL import Image

CAT_BREEDS = ("Abyssinian", "Bengal", "Birman")
DOG_BREEDS = ("beagle", "boxer", "pug")


def smooth_image(h: int, w: int, seed: int = 0) -> np.ndarray:
    """Gradient-plus-sinusoid test picture with a little texture."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    phase = rng.uniform(0, 2 * np.pi)
    img = np.stack(
        [
            x * 255.0 / max(w - 1, 1),
            y * 255.0 / max(h - 1, 1),
            127.5 + 100.0 * np.sin(x / 13.0 + phase) * np.cos(y / 17.0),
        ],
        axis=-1,
    )
    img += rng.normal(0.0, 2.0, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_pets_fixture(root: Path, n: int = 23, size_base: int = 96) -> Path:
    """``n`` Oxford-pets style images split into ``cats``/``dogs`` folders.

    Sizes vary per image and formats alternate between PNG and JPEG.
    """
    for i in range(n):
        cat = i < (n + 1) // 2
        label = "cats" if cat else "dogs"
        breed = (CAT_BREEDS if cat else DOG_BREEDS)[i % 3]
        folder = root / label
        folder.mkdir(parents=True, exist_ok=True)
        h = size_base + 5 * (i % 7)
        w = size_base + 11 * (i % 5)
        img = smooth_image(h, w, seed=i)
        ext = "png" if i % 2 == 0 else "jpg"
        Image.fromarray(img).save(folder / f"{breed}_{i + 1}.{ext}")
    return root


@pytest.fixture
def pets(tmp_path) -> Path:
    return write_pets_fixture(tmp_path / "pets", n=6, size_base=40)


@pytest.fixture
def rng_np():
    return np.random.default_rng(12345)
