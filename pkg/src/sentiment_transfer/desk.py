"""A small, reproducible input/reference set for desk-scale evaluation.

Inputs are scikit-image's bundled sample photographs. Each reference is a
mirrored, re-cropped view of the same scene with a mood grade applied
(gloomy, warm, misty, ...), imitating a content-related reference that
carries a different sentiment.
"""

import json
from pathlib import Path

import numpy as np

from .imaging import resize_long_side, save_image

SAMPLES = (
    ("astronaut", "gloomy"),
    ("coffee", "misty"),
    ("chelsea", "warm"),
    ("rocket", "dusk"),
    ("hubble_deep_field", "warm"),
    ("immunohistochemistry", "gloomy"),
    ("retina", "misty"),
    ("camera", "warm"),
    ("clock", "dusk"),
    ("coins", "gloomy"),
)


def _grade(img, mood):
    gray = img.mean(axis=2, keepdims=True)
    if mood == "gloomy":
        out = 0.55 * (0.6 * img + 0.4 * gray) * np.array([0.8, 0.9, 1.15])
    elif mood == "warm":
        out = img ** 0.8 * np.array([1.12, 0.98, 0.75])
    elif mood == "misty":
        out = 0.55 * (0.5 * img + 0.5 * gray) + 0.4 * np.array([0.85, 0.88, 0.9])
    elif mood == "dusk":
        out = 0.7 * img ** 1.3 * np.array([1.2, 0.75, 0.95])
    else:
        raise ValueError(f"unknown mood {mood!r}")
    return np.clip(out, 0.0, 1.0)


def _sample(name):
    import skimage.data

    img = np.asarray(getattr(skimage.data, name)(), dtype=np.float64)
    if img.max() > 1.0:
        img = img / 255.0
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    return img[:, :, :3]


def desk_pairs(long_side=256):
    """Yield ``(pair_id, input, reference)`` triples."""
    for name, mood in SAMPLES:
        img = _sample(name)
        h, w = img.shape[:2]
        dy, dx = h // 10, w // 10
        ref = img[dy:, : w - dx][:, ::-1]
        inp = resize_long_side(img, long_side)
        ref = resize_long_side(_grade(ref, mood), long_side)
        yield f"{name}-{mood}", inp, ref


def write_desk_set(out_dir, long_side=256):
    """Write the set as PNGs plus a ``pairs.jsonl`` with input/reference paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for pair_id, inp, ref in desk_pairs(long_side):
        save_image(inp, out_dir / f"{pair_id}-input.png")
        save_image(ref, out_dir / f"{pair_id}-reference.png")
        lines.append(json.dumps({
            "pair_id": pair_id,
            "input": f"{pair_id}-input.png",
            "reference": f"{pair_id}-reference.png",
        }))
    (out_dir / "pairs.jsonl").write_text("\n".join(lines) + "\n")
    return out_dir / "pairs.jsonl"
