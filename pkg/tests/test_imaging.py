import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from sentiment_transfer.errors import DecodeError, IoError, NotFound
from sentiment_transfer.imaging import (
    load_image,
    resize,
    resize_long_side,
    rgb_to_luma,
    save_image,
)


def test_load_maps_bytes_over_255(tmp_path):
    data = np.zeros((2, 2, 3), dtype=np.uint8)
    data[0, 1] = (255, 0, 0)
    Image.fromarray(data).save(tmp_path / "red.png")
    img = load_image(tmp_path / "red.png")
    assert img.shape == (2, 2, 3)
    assert tuple(img[0, 1]) == (1.0, 0.0, 0.0)


def test_load_drops_alpha(tmp_path):
    data = np.full((4, 4, 4), 200, dtype=np.uint8)
    data[..., 3] = 7
    Image.fromarray(data, mode="RGBA").save(tmp_path / "a.png")
    img = load_image(tmp_path / "a.png")
    assert img.shape == (4, 4, 3)
    np.testing.assert_array_equal(img, 200 / 255)


def test_load_jpeg(tmp_path):
    Image.fromarray(np.full((16, 16, 3), 128, np.uint8)).save(tmp_path / "g.jpg", quality=95)
    img = load_image(tmp_path / "g.jpg")
    assert img.shape == (16, 16, 3)
    assert abs(img.mean() - 128 / 255) < 2 / 255


def test_load_missing(tmp_path):
    with pytest.raises(NotFound):
        load_image(tmp_path / "missing.png")


def test_load_corrupt(tmp_path):
    (tmp_path / "bad.png").write_bytes(b"\x89PNG not really")
    with pytest.raises(DecodeError):
        load_image(tmp_path / "bad.png")


def test_save_half_gray_is_128(tmp_path):
    save_image(np.full((4, 4, 3), 0.5), tmp_path / "g.png")
    raw = np.asarray(Image.open(tmp_path / "g.png"))
    assert raw.dtype == np.uint8 and np.all(raw == 128)


def test_save_clamps(tmp_path):
    img = np.full((8, 8, 3), 1.2)
    img[0, 0] = -0.3
    save_image(img, tmp_path / "c.png")
    raw = np.asarray(Image.open(tmp_path / "c.png"))
    assert raw[1, 1, 0] == 255 and raw[0, 0, 0] == 0


def test_save_unwritable(tmp_path):
    with pytest.raises(IoError):
        save_image(np.zeros((8, 8, 3)), tmp_path / "nodir" / "x.png")


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_save_read_only_dir(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        with pytest.raises(IoError):
            save_image(np.zeros((8, 8, 3)), ro / "x.png")
    finally:
        ro.chmod(0o700)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (9, 11, 3), elements=st.floats(-0.5, 1.5)))
def test_round_trip_within_quantization(tmp_path_factory, img):
    path = tmp_path_factory.mktemp("rt") / "x.png"
    save_image(img, path)
    back = load_image(path)
    assert np.max(np.abs(back - np.clip(img, 0, 1))) <= 1 / 510 + 1e-12


@pytest.mark.parametrize("shape, target, expected", [
    ((600, 800), 512, (384, 512)),
    ((512, 512), 512, (512, 512)),
    ((50, 100), 512, (256, 512)),
    ((800, 600), 512, (512, 384)),
])
def test_resize_long_side_shapes(shape, target, expected):
    img = np.random.default_rng(0).random(shape + (3,))
    assert resize_long_side(img, target).shape[:2] == expected


def test_resize_identity_and_idempotent():
    img = np.random.default_rng(1).random((40, 30, 3))
    np.testing.assert_array_equal(resize_long_side(img, 40), img)
    once = resize_long_side(img, 64)
    np.testing.assert_array_equal(resize_long_side(once, 64), once)


def test_resize_rejects_tiny_target():
    with pytest.raises(ValueError):
        resize_long_side(np.zeros((16, 16, 3)), 4)


def test_resize_half_pixel_bilinear():
    # 2x upsample of [0, 1]: sample centres at -0.25, 0.25, 0.75, 1.25 source px
    row = np.array([[0.0, 1.0]])
    out = resize(row, 1, 4)
    np.testing.assert_allclose(out[0], [0.0, 0.25, 0.75, 1.0])


def test_resize_constant_stays_constant():
    img = np.full((13, 7, 3), 0.3)
    np.testing.assert_allclose(resize(img, 29, 5), 0.3)


@pytest.mark.parametrize("rgb, expected", [
    ((1.0, 1.0, 1.0), 1.0),
    ((1.0, 0.0, 0.0), 0.2126),
    ((0.5, 0.5, 0.5), 0.5),
])
def test_luma_values(rgb, expected):
    img = np.broadcast_to(np.array(rgb), (8, 8, 3))
    np.testing.assert_allclose(rgb_to_luma(img), expected, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (8, 8, 3), elements=st.floats(0, 1)))
def test_luma_between_channel_extremes(img):
    y = rgb_to_luma(img)
    assert np.all(y >= img.min(axis=2) - 1e-12)
    assert np.all(y <= img.max(axis=2) + 1e-12)
