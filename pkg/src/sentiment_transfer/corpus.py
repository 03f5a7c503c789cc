"""Tagged image corpus: manifest ingestion and the on-disk retrieval index.

Manifest: JSON lines, one ``{"id", "path", "noun", "adjective"}`` object per
line. Relative image paths are resolved against the manifest's directory.

Index layout (``schema_version`` 1)::

    <out_dir>/index.json
    <out_dir>/edges/<id>.png     8-bit edge map at the retrieval size
"""

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from .edges import EDGE_BACKENDS, RETRIEVAL_SIZE, retrieval_signature
from .errors import (
    BackendUnavailable,
    CorruptIndex,
    DuplicateId,
    EntryImageError,
    IoError,
    MissingEdgeMap,
    MissingField,
    ParseError,
    SentimentTransferError,
)
from .imaging import load_image, save_image

SCHEMA_VERSION = 1
REQUIRED_FIELDS = ("id", "path", "noun", "adjective")
_BAD_ID = re.compile(r"[/\\\x00]|^\.\.?$")


def normalize_tag(tag):
    return str(tag).strip().lower()


@dataclass
class CorpusEntry:
    id: str
    path: str
    noun: str
    adjective: str
    width: int = 0
    height: int = 0
    edge_path: str = ""


@dataclass
class CorpusIndex:
    entries: list
    edge_backend: str = "sobel"
    created_at: str = ""
    retrieval_size: int = RETRIEVAL_SIZE
    root: Path = field(default=None, compare=False, repr=False)

    @property
    def vocabulary(self):
        return {(e.noun, e.adjective) for e in self.entries}

    def edge_file(self, entry):
        return Path(self.root) / entry.edge_path

    def load_edge_map(self, entry):
        with Image.open(self.edge_file(entry)) as im:
            return np.asarray(im.convert("L"), dtype=np.float64) / 255.0

    def to_json(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "edge_backend": self.edge_backend,
            "retrieval_size": self.retrieval_size,
            "created_at": self.created_at,
            "vocabulary": [list(p) for p in sorted(self.vocabulary)],
            "entries": [asdict(e) for e in self.entries],
        }


def ingest_manifest(path):
    """Parse a JSON-lines manifest into corpus entries, keeping file order."""
    path = Path(path)
    base = path.parent
    entries, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("expected a JSON object", line=lineno)
            for key in REQUIRED_FIELDS:
                if key not in record:
                    raise MissingField(f"missing field {key!r}", line=lineno)
                if not isinstance(record[key], str):
                    raise ParseError(f"field {key!r} must be a string", line=lineno)
            entry_id = record["id"].strip()
            if not entry_id or _BAD_ID.search(entry_id):
                raise ParseError(f"unusable id {record['id']!r}", line=lineno)
            if entry_id in seen:
                raise DuplicateId(entry_id, line=lineno)
            seen.add(entry_id)
            noun, adjective = normalize_tag(record["noun"]), normalize_tag(record["adjective"])
            if not noun or not adjective:
                raise ParseError("noun and adjective must be non-empty", line=lineno)
            img_path = Path(record["path"])
            if not img_path.is_absolute():
                img_path = base / img_path
            entries.append(CorpusEntry(entry_id, str(img_path), noun, adjective))
    return entries


def _index_entry(entry, backend, size, edges_dir):
    try:
        img = load_image(entry.path)
    except SentimentTransferError as exc:
        raise EntryImageError(entry.id, str(exc)) from exc
    h, w = img.shape[:2]
    try:
        sig = retrieval_signature(img, backend, size)
    except ValueError as exc:
        raise EntryImageError(entry.id, str(exc)) from exc
    rel = f"edges/{entry.id}.png"
    save_image(sig, edges_dir / f"{entry.id}.png")
    return CorpusEntry(entry.id, entry.path, entry.noun, entry.adjective, w, h, rel)


def build_index(entries, backend="sobel", out_dir=".", workers=1, size=RETRIEVAL_SIZE):
    """Precompute edge maps for ``entries`` and write the index to ``out_dir``."""
    if backend not in EDGE_BACKENDS:
        raise BackendUnavailable(f"unknown edge backend {backend!r}")
    out_dir = Path(out_dir)
    edges_dir = out_dir / "edges"
    try:
        edges_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {edges_dir}: {exc}") from exc

    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise DuplicateId(dup)

    def work(entry):
        return _index_entry(entry, backend, size, edges_dir)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            indexed = list(pool.map(work, entries))
    else:
        indexed = [work(e) for e in entries]

    index = CorpusIndex(
        entries=indexed,
        edge_backend=backend,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        retrieval_size=size,
        root=out_dir,
    )
    try:
        with open(out_dir / "index.json", "w", encoding="utf-8") as fh:
            json.dump(index.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write index: {exc}") from exc
    return index


def load_index(directory):
    """Read and validate an index written by :func:`build_index`."""
    directory = Path(directory)
    index_file = directory / "index.json"
    if not index_file.is_file():
        raise CorruptIndex(f"{index_file} not found")
    try:
        with open(index_file, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptIndex(f"index.json is not valid JSON: {exc}") from exc

    if not isinstance(raw, dict) or raw.get("schema_version") != SCHEMA_VERSION:
        raise CorruptIndex("unsupported or missing schema_version")
    try:
        entries = [CorpusEntry(**e) for e in raw["entries"]]
        index = CorpusIndex(
            entries=entries,
            edge_backend=raw["edge_backend"],
            created_at=raw["created_at"],
            retrieval_size=int(raw["retrieval_size"]),
            root=directory,
        )
        stored_vocab = {tuple(p) for p in raw["vocabulary"]}
    except (KeyError, TypeError) as exc:
        raise CorruptIndex(f"malformed index.json: {exc}") from exc

    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise CorruptIndex("duplicate entry ids")
    if stored_vocab != index.vocabulary:
        raise CorruptIndex("stored vocabulary disagrees with entries")
    for e in entries:
        if not e.edge_path or not index.edge_file(e).is_file():
            raise MissingEdgeMap(f"edge map for {e.id!r} not found")
    return index
