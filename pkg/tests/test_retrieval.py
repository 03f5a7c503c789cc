import json

import numpy as np
import pytest

from sentiment_transfer.corpus import build_index, ingest_manifest, load_index
from sentiment_transfer.errors import BackendUnavailable, NoCandidates
from sentiment_transfer.imaging import load_image
from sentiment_transfer.retrieval import (
    SentimentQuery,
    perceptual_distance,
    retrieve_reference,
    select_subset,
)

from helpers import scene, write_corpus
from oracles import ssim_bruteforce


@pytest.fixture
def small_index(tmp_path, rng):
    manifest = write_corpus(tmp_path / "c", [
        ("a", "river", "clear"), ("b", "river", "muddy"), ("c", "lake", "misty"),
    ], rng)
    return load_index(build_index(ingest_manifest(manifest), "sobel", tmp_path / "idx").root)


def test_select_subset(small_index):
    assert [e.id for e in select_subset(small_index, "river", "muddy")] == ["b"]
    assert select_subset(small_index, "river", "misty") == []
    assert select_subset(small_index, "River ", "MUDDY") == select_subset(small_index, "river", "muddy")


def test_query_normalizes_and_validates(rng):
    q = SentimentQuery(rng.random((16, 16, 3)), " Lake", "MISTY ")
    assert (q.noun, q.adjective) == ("lake", "misty")
    with pytest.raises(ValueError):
        SentimentQuery(rng.random((16, 16, 3)), "lake", "misty", top_k=0)
    with pytest.raises(ValueError):
        SentimentQuery(rng.random((16, 16, 3)), "lake", "misty", strategy="lpips")


def test_no_candidates(small_index, rng):
    with pytest.raises(NoCandidates, match="misty"):
        retrieve_reference(small_index, SentimentQuery(rng.random((32, 32, 3)), "river", "misty"))


def _layout_corpus(tmp_path, rng, size):
    inp = scene(rng, 64, 64)
    recolor = inp[:, :, ::-1] * 0.7 + 0.1
    shuffled = rng.permutation(inp.reshape(-1, 3)).reshape(inp.shape)
    manifest = write_corpus(tmp_path / "c", [
        ("copy", "river", "muddy", inp), ("recolor", "river", "muddy", recolor),
        ("shuffled", "river", "muddy", shuffled), ("other", "river", "clear", inp),
    ], rng)
    index = build_index(ingest_manifest(manifest), "sobel", tmp_path / "idx", size=size)
    # query with the decoded file so the copy is pixel-identical
    return load_image(tmp_path / "c" / "copy.png"), index


def test_structure_beats_permutation_with_oracle(tmp_path, rng):
    inp, index = _layout_corpus(tmp_path, rng, size=48)
    result = retrieve_reference(index, SentimentQuery(inp, "river", "muddy", top_k=3))
    assert [i for i, _ in result.ranked] == ["copy", "recolor", "shuffled"]
    scores = dict(result.ranked)
    assert scores["copy"] == pytest.approx(1.0, abs=1e-6)
    from sentiment_transfer.edges import retrieval_signature
    probe = retrieval_signature(inp, size=48)
    for entry in index.entries[1:3]:
        ref = ssim_bruteforce(probe.tolist(), index.load_edge_map(entry).tolist())
        assert scores[entry.id] == pytest.approx(ref, abs=1e-9)
    assert scores["recolor"] > scores["shuffled"]


def test_top_k_total_ranking_and_json(tmp_path, rng):
    inp, index = _layout_corpus(tmp_path, rng, size=64)
    result = retrieve_reference(index, SentimentQuery(inp, "river", "muddy", top_k=10))
    assert sorted(i for i, _ in result.ranked) == ["copy", "recolor", "shuffled"]
    assert all(-1 <= s <= 1 for _, s in result.ranked)
    data = json.loads(result.dumps())
    assert data["strategy"] == "ssim-edge"
    assert data["ranked"][0] == {"id": "copy", "score": result.ranked[0][1]}


def test_ties_break_by_id(tmp_path, rng):
    img = scene(rng)
    manifest = write_corpus(tmp_path / "c", [("z", "a", "b", img), ("m", "a", "b", img), ("q", "a", "b", img)], rng)
    index = build_index(ingest_manifest(manifest), "sobel", tmp_path / "idx", size=32)
    result = retrieve_reference(index, SentimentQuery(scene(rng), "a", "b", top_k=3))
    assert [i for i, _ in result.ranked] == ["m", "q", "z"]


def test_removing_non_top_entry_keeps_top(tmp_path, rng):
    inp, index = _layout_corpus(tmp_path, rng, size=48)
    full = retrieve_reference(index, SentimentQuery(inp, "river", "muddy", top_k=3))
    index.entries = [e for e in index.entries if e.id != full.ranked[-1][0]]
    assert retrieve_reference(index, SentimentQuery(inp, "river", "muddy")).best == full.best


def test_perceptual_strategy(tmp_path, rng, densenet):
    inp, index = _layout_corpus(tmp_path, rng, size=64)
    q = SentimentQuery(inp, "river", "muddy", strategy="perceptual", top_k=3)
    with pytest.raises(BackendUnavailable):
        retrieve_reference(index, q)
    result = retrieve_reference(index, q, densenet)
    assert result.strategy == "perceptual"
    assert result.ranked[0] == ("copy", 0.0)
    dists = [s for _, s in result.ranked]
    assert dists == sorted(dists)


def test_perceptual_distance_properties(densenet, rng):
    import torch
    from sentiment_transfer.backbone import extract_features
    with torch.no_grad():
        a = extract_features(densenet, rng.random((64, 64, 3)))
        b = extract_features(densenet, rng.random((64, 64, 3)))
    assert perceptual_distance(a, a) == 0.0
    assert perceptual_distance(a, b) == pytest.approx(perceptual_distance(b, a), rel=1e-6)
    # unit-normalized features differ by at most 4 per spatial position
    assert 0 < perceptual_distance(a, b) <= 4.0
