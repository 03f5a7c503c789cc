"""Image loading, saving, resizing and grayscale conversion.

Images are plain float64 numpy arrays: ``(H, W, 3)`` RGB in ``[0, 1]`` for
color images, ``(H, W)`` for single-channel maps. 8-bit files are only
touched at the I/O boundary.
"""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, IoError, NotFound

MIN_SIDE = 8
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


def check_image(img, name="image"):
    """Validate an RGB image array and return it as float64."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"{name} must have shape (H, W, 3), got {img.shape}")
    if img.shape[0] < MIN_SIDE or img.shape[1] < MIN_SIDE:
        raise ValueError(f"{name} must be at least {MIN_SIDE}x{MIN_SIDE}, got {img.shape[:2]}")
    if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
        raise ValueError(f"{name} values must lie in [0, 1]")
    return img


def load_image(path):
    """Read a PNG or JPEG file as an RGB float image.

    8-bit values map to ``v / 255``; alpha is dropped and grayscale files are
    replicated across the three channels.
    """
    path = Path(path)
    if not path.is_file():
        raise NotFound(str(path))
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("RGB", "RGBA", "L", "LA", "P"):
                raise DecodeError(f"{path}: unsupported mode {im.mode}")
            rgb = im.convert("RGB")
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return np.asarray(rgb, dtype=np.float64) / 255.0


def to_uint8(img):
    return np.round(np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(img, path):
    """Write an RGB (or single-channel) float image as an 8-bit PNG."""
    path = Path(path)
    data = to_uint8(img)
    mode = "L" if data.ndim == 2 else "RGB"
    try:
        Image.fromarray(data, mode=mode).save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _resize_axis(arr, new_len, axis):
    old_len = arr.shape[axis]
    if new_len == old_len:
        return arr
    # half-pixel centres (align_corners=False), edge-clamped
    scale = old_len / new_len
    src = (np.arange(new_len) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, old_len - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, old_len - 1)
    w = src - lo
    shape = [1] * arr.ndim
    shape[axis] = new_len
    w = w.reshape(shape)
    return np.take(arr, lo, axis=axis) * (1.0 - w) + np.take(arr, hi, axis=axis) * w


def resize(img, height, width):
    """Bilinear resize of an (H, W) or (H, W, C) array to ``(height, width)``."""
    img = np.asarray(img, dtype=np.float64)
    out = _resize_axis(img, int(height), 0)
    return _resize_axis(out, int(width), 1)


def long_side_shape(height, width, target):
    if height >= width:
        return target, max(1, int(round(width * target / height)))
    return max(1, int(round(height * target / width))), target


def resize_long_side(img, target):
    """Resize so the longer side equals ``target``, keeping the aspect ratio."""
    if target < MIN_SIDE:
        raise ValueError(f"target must be >= {MIN_SIDE}, got {target}")
    h, w = img.shape[:2]
    nh, nw = long_side_shape(h, w, target)
    if (nh, nw) == (h, w):
        return np.asarray(img, dtype=np.float64)
    return resize(img, nh, nw)


def rgb_to_luma(img):
    """Rec.709 luma of an RGB image."""
    img = np.asarray(img, dtype=np.float64)
    return np.clip(img @ LUMA_WEIGHTS, 0.0, 1.0)
