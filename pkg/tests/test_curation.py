"""Semantic, tier, and near-duplicate filtering."""
from __future__ import annotations

import pytest

from celldoc.curation import (
    CurationConfig,
    apply,
    code_shingles,
    cosine,
    dedup_survivors,
    jaccard,
    near_duplicates,
    passes_semantic,
    semantic_relevance,
    tier_filter,
)
from celldoc.errors import ConfigInvalid
from celldoc.providers import HashingEmbedder

from conftest import make_pair
from corpus_builders import boundary_pair, pick_distinct_bucket_tokens


@pytest.fixture()
def embedder():
    return HashingEmbedder(dim=384)


def test_cosine_basics():
    assert cosine([1.0, 0.0], [0.0, 2.0]) == 0.0
    assert cosine([2.0, 1.0], [2.0, 1.0]) == pytest.approx(1.0, abs=1e-12)
    assert cosine([0.0, 0.0], [1.0, 1.0]) == 0.0


def test_semantic_relevance_identical_and_disjoint(embedder):
    same = make_pair("a:0001", "alpha beta gamma", "alpha beta gamma")
    assert semantic_relevance(same, embedder) == 1.0
    tokens = pick_distinct_bucket_tokens(embedder, 8, "dj_")
    apart = make_pair("a:0002", " ".join(tokens[:4]), " ".join(tokens[4:]))
    assert semantic_relevance(apart, embedder) == 0.0


def test_semantic_threshold_is_inclusive(embedder):
    pair = boundary_pair(embedder)
    score = semantic_relevance(pair, embedder)
    assert score == 0.58
    assert passes_semantic(score, 0.58)
    assert not passes_semantic(0.5799999, 0.58)


def test_tier_filter():
    assert tier_filter(make_pair("a:0001", "x", "doc", author_tier=1), 1)
    assert not tier_filter(make_pair("a:0002", "x", "doc", author_tier=0), 1)
    assert tier_filter(make_pair("a:0003", "x", "doc", author_tier=0), 0)


def test_code_shingles_window_and_short_cell():
    assert code_shingles("a b c d e f") == frozenset(
        {("a", "b", "c", "d", "e"), ("b", "c", "d", "e", "f")}
    )
    assert code_shingles("a b c") == frozenset({("a", "b", "c")})
    assert code_shingles("") == frozenset()


def test_code_shingles_ignore_magic_lines():
    assert code_shingles("%timeit x\na b c") == frozenset({("a", "b", "c")})


def test_jaccard_empty_rules():
    assert jaccard(frozenset(), frozenset()) == 1.0
    assert jaccard(frozenset({1}), frozenset()) == 0.0
    assert jaccard(frozenset({1, 2}), frozenset({2, 3})) == pytest.approx(1 / 3)


def test_near_duplicates_transitive_groups():
    base = [f"t{i}" for i in range(40)]
    items = [
        ("p2", " ".join(base + ["x2"])),
        ("p1", " ".join(base + ["x1"])),
        ("p3", " ".join(base + ["x3"])),
        ("q1", " ".join(f"u{i}" for i in range(40))),
    ]
    groups = near_duplicates(items, 0.70)
    assert groups == [["p1", "p2", "p3"], ["q1"]]


def test_near_duplicates_threshold_is_strict():
    common = [f"jb{i}" for i in range(11)]
    a = " ".join(common + ["taila"])
    b = " ".join(common + ["tailb", "tailc"])
    shingle_a, shingle_b = code_shingles(a), code_shingles(b)
    assert jaccard(shingle_a, shingle_b) == 0.7
    groups = near_duplicates([("a", a), ("b", b)], 0.70)
    assert groups == [["a"], ["b"]]
    joined = near_duplicates([("a", a), ("b", b)], 0.69)
    assert joined == [["a", "b"]]


def test_near_duplicates_embedding_backend(embedder):
    items = [("a", "same words here"), ("b", "same words here"), ("c", "other thing")]
    groups = near_duplicates(items, 0.9, backend="embedding", provider=embedder)
    assert groups == [["a", "b"], ["c"]]
    with pytest.raises(ConfigInvalid):
        near_duplicates(items, 0.9, backend="embedding", provider=None)
    with pytest.raises(ConfigInvalid):
        near_duplicates(items, 1.5)


def test_dedup_survivors_keeps_min_id():
    kept, removed = dedup_survivors([["b", "a", "c"], ["z"]])
    assert kept == {"a", "z"}
    assert removed == {"b", "c"}


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        CurationConfig(semantic_threshold=1.5)
    with pytest.raises(ConfigInvalid):
        CurationConfig(dedup_threshold=-0.1)
    with pytest.raises(ConfigInvalid):
        CurationConfig(dedup_backend="minhash")
    with pytest.raises(ConfigInvalid):
        CurationConfig(shingle_size=0)


def test_apply_runs_stages_in_order(embedder):
    base = [f"w{i}" for i in range(40)]
    dup_a = " ".join(base + ["da"])
    dup_b = " ".join(base + ["db"])
    off_tokens = pick_distinct_bucket_tokens(embedder, 8, "off_")
    pairs = [
        make_pair("n:0001", "alpha beta gamma delta", "alpha beta gamma delta"),
        make_pair("n:0002", " ".join(off_tokens[:4]), " ".join(off_tokens[4:])),
        make_pair("n:0003", "epsilon zeta eta theta", "epsilon zeta eta theta", author_tier=0),
        make_pair("n:0004", dup_a, dup_a),
        make_pair("n:0005", dup_b, dup_b),
        make_pair("n:0006", "iota kappa mu nu", "iota kappa mu nu", is_fork=True),
    ]
    result = apply(pairs, CurationConfig(), embedder)
    assert [p.pair_id for p in result.pairs] == ["n:0001", "n:0004"]
    stages = {r.stage: r for r in result.reports}
    assert set(stages) == {"semantic", "tier", "dedup"}
    assert stages["semantic"].removed_ids == ("n:0002",)
    assert stages["tier"].removed_ids == ("n:0003",)
    assert set(stages["dedup"].removed_ids) == {"n:0005", "n:0006"}
    assert stages["semantic"].n_in == 6
    assert stages["dedup"].n_out == 2
    text = result.report_text()
    assert "semantic" in text and "dedup" in text


def test_apply_drops_forks_before_grouping(embedder):
    base = [f"f{i}" for i in range(40)]
    original = " ".join(base + ["orig"])
    fork = " ".join(base + ["fork"])
    # the fork sorts first by id but must not displace the original
    pairs = [
        make_pair("a:0001", fork, fork, is_fork=True),
        make_pair("b:0001", original, original),
    ]
    result = apply(pairs, CurationConfig(), embedder)
    assert [p.pair_id for p in result.pairs] == ["b:0001"]


def test_apply_empty_corpus(embedder):
    result = apply([], CurationConfig(), embedder)
    assert result.pairs == ()
    assert [r.n_in for r in result.reports] == [0, 0, 0]
