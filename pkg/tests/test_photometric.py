import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augforge.core import FillMode, new_image
from augforge.geometry import flip_h, flip_v
from augforge.photometric import (
    BOX_BLUR,
    GAUSSIAN_BLUR,
    IDENTITY_KERNEL,
    SHARPEN,
    adjust_brightness,
    convolve3,
    isolate_channel,
)


def test_brightness_examples():
    assert adjust_brightness(new_image(2, 2, 100), 2.0).max() == 200
    assert (adjust_brightness(new_image(2, 2, 200), 2.1) == 255).all()
    assert not adjust_brightness(new_image(3, 3, 250), 0.0).any()
    with pytest.raises(ValueError):
        adjust_brightness(new_image(1, 1), -0.1)


def test_brightness_unit_factor_is_identity(rng_np):
    img = rng_np.integers(0, 256, (6, 5, 3), dtype=np.uint8)
    out = adjust_brightness(img, 1.0)
    assert np.array_equal(out, img) and out is not img


def test_brightness_rounding():
    # 3 * 0.5 = 1.5 rounds away from zero
    assert adjust_brightness(new_image(1, 1, 3), 0.5).max() == 2


@given(st.floats(0.0, 4.0))
@settings(deadline=None)
def test_brightness_monotone(factor):
    ramp = np.repeat(np.arange(256, dtype=np.uint8)[None, :, None], 3, axis=2)
    out = adjust_brightness(ramp, factor)[0, :, 0].astype(int)
    assert (np.diff(out) >= 0).all()


def test_isolate_channel_examples():
    px = np.array([[[10, 20, 30]]], dtype=np.uint8)
    assert isolate_channel(px, "R").tolist() == [[[10, 0, 0]]]
    assert isolate_channel(px, "g").tolist() == [[[0, 20, 0]]]
    assert isolate_channel(px, 2).tolist() == [[[0, 0, 30]]]
    assert not isolate_channel(new_image(4, 4, 0), "B").any()
    with pytest.raises(ValueError):
        isolate_channel(px, "A")


@given(st.integers(0, 2**32 - 1), st.sampled_from("RGB"))
@settings(max_examples=30, deadline=None)
def test_isolate_idempotent_and_commutes_with_flips(seed, ch):
    img = np.random.default_rng(seed).integers(0, 256, (5, 7, 3), dtype=np.uint8)
    once = isolate_channel(img, ch)
    assert np.array_equal(isolate_channel(once, ch), once)
    assert np.array_equal(isolate_channel(flip_h(img), ch), flip_h(once))
    assert np.array_equal(isolate_channel(flip_v(img), ch), flip_v(once))


def test_identity_kernel(rng_np):
    img = rng_np.integers(0, 256, (7, 6, 3), dtype=np.uint8)
    for mode in ("reflect", "nearest", "wrap", "constant"):
        assert np.array_equal(convolve3(img, IDENTITY_KERNEL, FillMode(mode, 9)), img)


def test_box_blur_single_pixel_plateau():
    img = new_image(5, 5, 0)
    img[2, 2] = 255
    out = convolve3(img, BOX_BLUR, FillMode("constant", 0))[:, :, 0]
    expected = np.zeros((5, 5), dtype=int)
    expected[1:4, 1:4] = 28
    assert out.tolist() == expected.tolist()


def convolve_oracle(img, k, fill):
    from augforge.core import clamp_round, map_index

    h, w = img.shape[:2]
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            for c in range(3):
                acc = 0.0
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        jy, jx = map_index(y + dy, h, fill), map_index(x + dx, w, fill)
                        v = fill.cval if jy is None or jx is None else img[jy, jx, c]
                        acc += k[dy + 1][dx + 1] * float(v)
                out[y, x, c] = clamp_round(acc)
    return out


@pytest.mark.parametrize("mode", ["reflect", "nearest", "wrap", "constant"])
@pytest.mark.parametrize("kernel", [BOX_BLUR, GAUSSIAN_BLUR, SHARPEN])
def test_convolve_matches_oracle(mode, kernel, rng_np):
    img = rng_np.integers(0, 256, (6, 7, 3), dtype=np.uint8)
    fill = FillMode(mode, 40)
    got = convolve3(img, kernel, fill).astype(int)
    assert np.abs(got - convolve_oracle(img, kernel, fill)).max() <= 1


def test_asymmetric_kernel_is_correlation():
    row = np.zeros((1, 3, 3), dtype=np.uint8)
    row[0, 2] = 90
    k = np.zeros((3, 3))
    k[1, 2] = 1.0  # weight on the right-hand neighbor
    out = convolve3(row, k, FillMode("constant", 0))
    assert out[0, :, 0].tolist() == [0, 90, 0]


@given(st.integers(0, 255), st.sampled_from(["reflect", "nearest", "wrap"]))
@settings(deadline=None)
def test_unit_sum_kernels_keep_constants(v, mode):
    img = new_image(4, 3, v)
    for k in (BOX_BLUR, GAUSSIAN_BLUR, SHARPEN):
        assert (convolve3(img, k, FillMode(mode)) == v).all()


def test_bad_kernel():
    with pytest.raises(ValueError):
        convolve3(new_image(2, 2), np.ones((2, 2)))
    with pytest.raises(ValueError):
        convolve3(new_image(2, 2), np.full((3, 3), np.nan))
