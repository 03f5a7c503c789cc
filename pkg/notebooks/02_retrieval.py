"""Building a tagged corpus and retrieving a reference.

Run:  python notebooks/02_retrieval.py [OUT_DIR]

A corpus is a JSON-lines manifest of images tagged with a noun and a mood
adjective. Indexing stores one edge map per image; a query first narrows to
entries with the same noun and adjective, then ranks them by edge SSIM.
"""

import json
import sys
from pathlib import Path

import numpy as np
from skimage import data, transform

from sentiment_transfer import SentimentQuery, build_index, ingest_manifest, load_index, retrieve_reference
from sentiment_transfer.imaging import resize_long_side, save_image

out = Path(sys.argv[1] if len(sys.argv) > 1 else "notebook-out/02")
(out / "images").mkdir(parents=True, exist_ok=True)

# %% A small corpus: rotated and flipped cat photos tagged "cat"/"sleepy",
# plus a few other subjects under the same adjective
cat = resize_long_side(data.chelsea() / 255.0, 192)
variants = {
    "cat-flip": (cat[:, ::-1], "cat"),
    "cat-rot": (transform.rotate(cat, 25, mode="edge"), "cat"),
    "cat-dark": (cat * 0.4, "cat"),
    "coffee": (resize_long_side(data.coffee() / 255.0, 192), "cup"),
    "astronaut": (resize_long_side(data.astronaut() / 255.0, 192), "person"),
}
lines = []
for name, (img, noun) in variants.items():
    save_image(img, out / "images" / f"{name}.png")
    lines.append(json.dumps({"id": name, "path": f"images/{name}.png", "noun": noun, "adjective": "sleepy"}))
(out / "manifest.jsonl").write_text("\n".join(lines) + "\n")

# %% Index once, reload any time
build_index(ingest_manifest(out / "manifest.jsonl"), "sobel", out / "index")
index = load_index(out / "index")
print("vocabulary:", sorted(index.vocabulary))

# %% Query with a new cat photo. Tags are normalized, so " Cat " works.
# The darkened copy keeps the original layout and ranks first.
result = retrieve_reference(index, SentimentQuery(cat, " Cat ", "SLEEPY", top_k=3))
print(result.dumps())

# %% A noun/adjective pair absent from the index raises NoCandidates
try:
    retrieve_reference(index, SentimentQuery(cat, "cat", "angry"))
except Exception as exc:
    print(type(exc).__name__, exc)
