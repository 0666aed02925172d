import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augforge.core import clamp_round, new_image
from augforge.noise import (
    DEFAULT_VARIABILITY,
    SaltPepperParams,
    add_gaussian_noise,
    add_salt_pepper,
    gaussian_noise,
    salt_pepper_masks,
)
from augforge.rng import RandomStream


def test_default_variability():
    assert DEFAULT_VARIABILITY == 50


def test_zero_variability_is_identity(rng_np):
    img = rng_np.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    assert np.array_equal(add_gaussian_noise(img, 0.0, RandomStream(1)), img)
    with pytest.raises(ValueError):
        add_gaussian_noise(img, -1.0, RandomStream(1))


def test_forced_deviation_statistics():
    out = gaussian_noise(new_image(512, 512, 128), 25.0, RandomStream(2024)).astype(float)
    assert abs(out.mean() - 128) <= 0.5
    assert abs(out.std() - 25) <= 1.0


def test_fused_kernel_matches_reference_path(rng_np):
    img = rng_np.integers(0, 256, (9, 11, 3), dtype=np.uint8)
    fused = gaussian_noise(img, 17.5, RandomStream(99))
    z = RandomStream(99).normal_array(img.size).reshape(img.shape)
    assert np.array_equal(fused, clamp_round(img + 17.5 * z))


def test_deviation_drawn_once_per_image():
    a, b = RandomStream(5), RandomStream(5)
    img = new_image(6, 4, 100)
    dev = 50.0 * b.random()
    assert np.array_equal(add_gaussian_noise(img, 50.0, a), gaussian_noise(img, dev, b))


def test_gaussian_reproducible():
    img = new_image(16, 16, 60)
    assert np.array_equal(add_gaussian_noise(img, 50, RandomStream(7)),
                          add_gaussian_noise(img, 50, RandomStream(7)))


def test_salt_pepper_examples(rng_np):
    img = rng_np.integers(0, 256, (10, 10, 3), dtype=np.uint8)
    assert np.array_equal(add_salt_pepper(img, SaltPepperParams(0.0), RandomStream(1)), img)
    assert (add_salt_pepper(img, SaltPepperParams(1.0, 1.0), RandomStream(1)) == 255).all()
    assert not add_salt_pepper(img, SaltPepperParams(1.0, 0.0), RandomStream(1)).any()


def test_salt_pepper_count():
    img = new_image(100, 100, 128)
    out = add_salt_pepper(img, SaltPepperParams(0.1), RandomStream(31337))
    corrupted = (out != 128).any(axis=2).sum()
    assert 900 <= corrupted <= 1100


@given(st.integers(0, 2**64 - 1), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=30, deadline=None)
def test_uncorrupted_pixels_unchanged(seed, amount, ratio):
    img = np.random.default_rng(seed % 2**32).integers(0, 256, (12, 9, 3), dtype=np.uint8)
    params = SaltPepperParams(amount, ratio)
    corrupted, salt = salt_pepper_masks(12, 9, params, RandomStream(seed))
    out = add_salt_pepper(img, params, RandomStream(seed))
    assert np.array_equal(out[~corrupted], img[~corrupted])
    assert (out[salt] == 255).all()
    assert (out[corrupted & ~salt] == 0).all()


def test_salt_pepper_params_validated():
    with pytest.raises(ValueError):
        SaltPepperParams(1.5)
    with pytest.raises(ValueError):
        SaltPepperParams(0.1, -0.1)
