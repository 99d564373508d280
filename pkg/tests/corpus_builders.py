"""Constructed corpora with planted violations and exact-score geometry.

Curation corpora choose token sets so cosines come out as simple rational
numbers (0, 29/50, 1) with no floating-point slack. The synthetic retrieval
index keeps every raw metric an integer in [0, 16] with planted all-0 and
all-16 rows, so min-max normalization yields exact dyadic values and both
the library and a pure-Python oracle compute bit-identical scores.
"""
from __future__ import annotations

import random

import numpy as np

from celldoc.ingest import CodeMarkdownPair
from celldoc.metrics import PopularityTable
from celldoc.retrieval import CorpusIndex, fit_normalizer, normalize

from conftest import make_pair

# Two lines, all identifiers two characters long, every metric an integer:
# loc=2 s=2 cyc=1 klcid=3 oprnd=6 oprator=4 uoprnd=4 uoprat=3 allc=12 id=6 alid=2
SYNTH_QUERY_CODE = "ab = cd + ef\ngh = ab - cd"
SYNTH_QUERY_RAW = (2, 0, 0, 0, 2, 0, 0, 0, 1, 3.0, 6, 4, 4, 3, 12.0, 6, 2.0, 0, 0.0, 0, 0)


def build_synthetic_index(n: int, embedder, seed: int = 13):
    """A retrieval index with prescribed metric rows and one-hot embeddings.

    Row 0 duplicates the query's code and metrics (it must be excluded from
    every ranking); rows 1 and 2 pin the min-max range to [0, 16]; every
    seventh row repeats one template so rankings contain exact score ties.
    """
    rng = random.Random(seed)
    dim = embedder.dim
    template = [rng.randint(0, 16) for _ in range(21)]
    ids = []
    rows = []
    codes = []
    for i in range(n):
        ids.append(f"s{i:04d}")
        if i == 0:
            rows.append(list(SYNTH_QUERY_RAW))
            codes.append(SYNTH_QUERY_CODE)
            continue
        codes.append(f"row {i} payload")
        if i == 1:
            rows.append([0] * 21)
        elif i == 2:
            rows.append([16] * 21)
        elif i % 7 == 3:
            rows.append(list(template))
        else:
            rows.append([rng.randint(0, 16) for _ in range(21)])

    raw = np.array(rows, dtype=np.float64)
    stats = fit_normalizer(raw)
    norm = np.vstack([normalize(raw[i], stats) for i in range(n)])
    embedding = np.zeros((n, dim), dtype=np.float64)
    for i in range(n):
        embedding[i, i % dim] = 1.0

    pairs = tuple(
        make_pair(ids[i], codes[i], f"synthetic doc {i}") for i in range(n)
    )
    index = CorpusIndex(
        pair_ids=tuple(ids),
        raw_matrix=raw,
        norm_matrix=norm,
        stats=stats,
        popularity=PopularityTable.empty(),
        embedding_matrix=embedding,
        pairs=pairs,
    )
    buckets = [i % dim for i in range(n)]
    return index, buckets


def pick_distinct_bucket_tokens(embedder, count: int, prefix: str) -> list[str]:
    """Lowercase tokens that map to `count` pairwise-distinct buckets."""
    tokens: list[str] = []
    used: set[int] = set()
    i = 0
    while len(tokens) < count:
        token = f"{prefix}{i}"
        i += 1
        bucket = embedder.bucket(token)
        if bucket in used:
            continue
        used.add(bucket)
        tokens.append(token)
    return tokens


def boundary_pair(embedder, pair_id: str = "p41") -> CodeMarkdownPair:
    """Code and markdown of 50 tokens each sharing exactly 29: cosine 29/50."""
    tokens = pick_distinct_bucket_tokens(embedder, 71, "cb_")
    code = " ".join(tokens[:50])
    markdown = " ".join(tokens[21:71])
    return make_pair(pair_id, code, markdown)


def build_sixty_pair_corpus(embedder):
    """60 pairs with planted violations for every pipeline stage.

    Returns (pairs, planted) where planted maps a stage name to the exact
    set of pair ids that stage must remove, plus the boundary survivors.
    """
    pairs: list[CodeMarkdownPair] = []
    planted: dict[str, set[str]] = {
        "length": set(),
        "semantic": set(),
        "tier": set(),
        "dedup": set(),
        "boundary": set(),
    }

    def add(pair):
        pairs.append(pair)

    # p00-p04: markdown below the 4-word minimum
    for k in range(5):
        pid = f"p{k:02d}"
        words = " ".join(f"short{k}x{i}" for i in range(3))
        add(make_pair(pid, words, words))
        planted["length"].add(pid)

    # p05-p09: markdown above the 281-word maximum
    for k in range(5):
        pid = f"p{k + 5:02d}"
        words = " ".join(f"long{k}x{i}" for i in range(282))
        add(make_pair(pid, words, words))
        planted["length"].add(pid)

    # p10-p19: code and markdown share no embedding bucket -> cosine 0
    for k in range(10):
        pid = f"p{k + 10:02d}"
        tokens = pick_distinct_bucket_tokens(embedder, 12, f"sf{k}_")
        add(make_pair(pid, " ".join(tokens[:6]), " ".join(tokens[6:])))
        planted["semantic"].add(pid)

    # p20-p29: tier-0 authors
    for k in range(10):
        pid = f"p{k + 20:02d}"
        words = " ".join(f"tz{k}x{i}" for i in range(6))
        add(make_pair(pid, words, words, author_tier=0))
        planted["tier"].add(pid)

    # p30-p38: three duplicate triangles; min id survives each
    next_id = 30
    for g in range(3):
        common = [f"tri{g}x{i}" for i in range(40)]
        member_ids = []
        for m in range(3):
            pid = f"p{next_id:02d}"
            next_id += 1
            member_ids.append(pid)
            words = " ".join(common + [f"tri{g}tail{m}"])
            add(make_pair(pid, words, words))
        planted["dedup"].update(member_ids[1:])

    # p39-p40: shingle Jaccard exactly 0.70; strictly-above rule keeps both
    jb_common = [f"jb_{i}" for i in range(11)]
    a_words = " ".join(jb_common + ["jbtaila"])
    b_words = " ".join(jb_common + ["jbtailb", "jbtailc"])
    add(make_pair("p39", a_words, a_words))
    add(make_pair("p40", b_words, b_words))
    planted["boundary"].update({"p39", "p40"})

    # p41: semantic cosine exactly 0.58; inclusive threshold keeps it
    add(boundary_pair(embedder, "p41"))
    planted["boundary"].add("p41")

    # p42-p43: word counts exactly at the inclusive 4 and 281 bounds
    four = "edge four word note"
    add(make_pair("p42", four, four))
    mx = " ".join(f"mx_{i}" for i in range(281))
    add(make_pair("p43", mx, mx))
    planted["boundary"].update({"p42", "p43"})

    # p44-p59: sixteen clean pairs
    for k in range(16):
        pid = f"p{k + 44:02d}"
        words = " ".join(f"ok{k}x{i}" for i in range(6))
        add(make_pair(pid, words, words))

    assert len(pairs) == 60
    return pairs, planted
