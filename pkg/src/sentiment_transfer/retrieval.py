"""Reference retrieval: pick the corpus image most structurally similar to
the input among those carrying the input's noun and the target adjective.

Two ranking strategies:

``ssim-edge``
    SSIM between retrieval-size edge maps, higher is better.
``perceptual``
    mean over the five backbone taps of the squared difference between
    channel-unit-normalized features, lower is better.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import torch

from .backbone import extract_features
from .corpus import normalize_tag
from .edges import retrieval_signature, ssim
from .errors import BackendUnavailable, NoCandidates
from .imaging import check_image, load_image, resize

STRATEGIES = ("ssim-edge", "perceptual")


@dataclass
class SentimentQuery:
    input: np.ndarray
    noun: str
    adjective: str
    strategy: str = "ssim-edge"
    top_k: int = 1

    def __post_init__(self):
        self.noun = normalize_tag(self.noun)
        self.adjective = normalize_tag(self.adjective)
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass
class RetrievalResult:
    ranked: list
    strategy: str

    @property
    def best(self):
        return self.ranked[0][0]

    def to_json(self):
        return {
            "strategy": self.strategy,
            "ranked": [{"id": i, "score": s} for i, s in self.ranked],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def select_subset(index, noun, adjective):
    noun, adjective = normalize_tag(noun), normalize_tag(adjective)
    return [e for e in index.entries if e.noun == noun and e.adjective == adjective]


def _unit_channels(f):
    norm = torch.sqrt(torch.sum(f * f, dim=0, keepdim=True))
    return f / (norm + 1e-10)


def perceptual_distance(fa, fb):
    """Mean over taps of the MSE between channel-normalized features."""
    terms = [torch.mean((_unit_channels(a) - _unit_channels(b)) ** 2).item()
             for a, b in zip(fa, fb)]
    return float(sum(terms) / len(terms))


def _ranked(scores, descending):
    sign = -1.0 if descending else 1.0
    return sorted(scores, key=lambda item: (sign * item[1], item[0]))


def retrieve_reference(index, query, backbone=None, workers=1):
    """Rank the tag-matching subset of ``index`` against ``query.input``."""
    subset = select_subset(index, query.noun, query.adjective)
    if not subset:
        raise NoCandidates(query.noun, query.adjective)
    img = check_image(query.input, "input")
    size = index.retrieval_size

    if query.strategy == "ssim-edge":
        probe = retrieval_signature(img, index.edge_backend, size)

        def score(entry):
            return entry.id, ssim(probe, index.load_edge_map(entry))
        descending = True
    else:
        if backbone is None:
            raise BackendUnavailable("perceptual retrieval needs a loaded backbone")
        with torch.no_grad():
            probe = extract_features(backbone, resize(img, size, size))

        def score(entry):
            cand = resize(load_image(entry.path), size, size)
            with torch.no_grad():
                feats = extract_features(backbone, cand)
            return entry.id, perceptual_distance(probe, feats)
        descending = False

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, subset))
    else:
        scores = [score(e) for e in subset]
    ranked = _ranked(scores, descending)[: query.top_k]
    return RetrievalResult(ranked, query.strategy)
