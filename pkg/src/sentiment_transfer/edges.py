"""Edge responses and the windowed SSIM index.

The SSIM here follows the usual Gaussian-weighted formulation: local means,
variances and covariance are weighted averages over an 11x11 window
(sigma 1.5), the local index is averaged over every position where the
window fits entirely inside the image (no padding).
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .errors import BackendUnavailable, ShapeMismatch
from .imaging import check_image, resize, rgb_to_luma

RETRIEVAL_SIZE = 256
EDGE_BACKENDS = ("sobel", "learned")

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

_learned_detector = None


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")

    @property
    def c1(self):
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self):
        return (self.k2 * self.dynamic_range) ** 2


def gaussian_window(size, sigma):
    """Normalized 1-D Gaussian taps centred on the middle sample."""
    x = np.arange(size, dtype=np.float64) - size // 2
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(x, taps):
    # separable weighted average over all fully-contained windows
    rows = sliding_window_view(x, len(taps), axis=0) @ taps
    return sliding_window_view(rows, len(taps), axis=1) @ taps


def ssim_map(a, b, params=None):
    """Local SSIM values at every valid window position."""
    params = params or SsimParams()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"ssim operands differ in shape: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ShapeMismatch(f"ssim expects 2-D arrays, got shape {a.shape}")
    if min(a.shape) < params.window:
        raise ShapeMismatch(f"image {a.shape} smaller than the {params.window}px window")

    taps = gaussian_window(params.window, params.sigma)
    mu_a = _filter_valid(a, taps)
    mu_b = _filter_valid(b, taps)
    var_a = _filter_valid(a * a, taps) - mu_a * mu_a
    var_b = _filter_valid(b * b, taps) - mu_b * mu_b
    cov = _filter_valid(a * b, taps) - mu_a * mu_b

    c1, c2 = params.c1, params.c2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b, params=None):
    """Mean SSIM between two equally-shaped gray images."""
    return float(ssim_map(a, b, params).mean())


def sobel_magnitude(gray):
    gray = np.asarray(gray, dtype=np.float64)
    gx = ndimage.correlate(gray, SOBEL_X, mode="nearest")
    gy = ndimage.correlate(gray, SOBEL_Y, mode="nearest")
    return np.hypot(gx, gy)


# responses below this are floating-point residue of a flat region
FLAT_TOLERANCE = 1e-9


def normalize_max(response):
    peak = response.max()
    if peak <= FLAT_TOLERANCE:
        return np.zeros_like(response)
    return response / peak


def set_learned_detector(detector):
    """Install a callable ``detector(rgb) -> (H, W) response`` for the
    ``learned`` backend; pass ``None`` to remove it."""
    global _learned_detector
    _learned_detector = detector


def edge_response(img, backend="sobel"):
    """Single-channel edge map of an RGB image, max-normalized to [0, 1]."""
    img = check_image(img)
    if backend == "sobel":
        raw = sobel_magnitude(rgb_to_luma(img))
    elif backend == "learned":
        if _learned_detector is None:
            raise BackendUnavailable("learned edge backend has no detector loaded")
        raw = np.asarray(_learned_detector(img), dtype=np.float64)
        if raw.shape != img.shape[:2]:
            raise ShapeMismatch(f"learned detector returned {raw.shape}, expected {img.shape[:2]}")
        raw = np.clip(raw, 0.0, None)
    else:
        raise BackendUnavailable(f"unknown edge backend {backend!r}")
    return normalize_max(raw)


def quantize(gray):
    """Round-trip a [0, 1] map through 8 bits, as stored in edge PNGs."""
    return np.round(np.clip(gray, 0.0, 1.0) * 255.0) / 255.0


def retrieval_signature(img, backend="sobel", size=RETRIEVAL_SIZE):
    """Edge map at the fixed retrieval comparison size, 8-bit quantized."""
    img = check_image(img)
    return quantize(edge_response(resize(img, size, size), backend))
