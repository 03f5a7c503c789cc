import json

import numpy as np

from sentiment_transfer.imaging import save_image

# positive / negative noun-adjective pairs from the experiment vocabulary
VOCABULARY_PAIRS = [
    ("home", "warm"), ("river", "clear"), ("water", "clear"), ("mountain", "clear"),
    ("mountain", "scenic"), ("lake", "clear"), ("city", "lovely"), ("city", "bright"),
    ("city", "great"),
    ("room", "dark"), ("water", "muddy"), ("river", "muddy"), ("mountains", "misty"),
    ("hill", "rough"), ("lake", "misty"), ("landscape", "harsh"), ("city", "poor"),
]


def scene(rng, h=48, w=64):
    """Random blocky scene with strong structure."""
    img = np.zeros((h, w, 3))
    for _ in range(6):
        y0, x0 = rng.integers(0, h - 8), rng.integers(0, w - 8)
        y1, x1 = y0 + rng.integers(6, h - y0 + 1), x0 + rng.integers(6, w - x0 + 1)
        img[y0:y1, x0:x1] = rng.random(3)
    return img


def write_corpus(root, specs, rng):
    """specs: list of (id, noun, adjective[, image]); returns manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    lines = []
    for spec in specs:
        entry_id, noun, adj = spec[:3]
        img = spec[3] if len(spec) > 3 else scene(rng)
        save_image(img, root / f"{entry_id}.png")
        lines.append(json.dumps({"id": entry_id, "path": f"{entry_id}.png", "noun": noun, "adjective": adj}))
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
