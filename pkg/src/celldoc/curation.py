"""Conceptual filtering of paired data.

Three stages, applied in order: semantic relevance (code vs markdown cosine
against a threshold), author tier, and near-duplicate removal. Each stage
reports what it removed so the pipeline can write a curation report.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ConfigInvalid
from .ingest import CodeMarkdownPair
from .metrics import sanitize_cell_source
from .providers import EmbeddingProvider

_CODE_TOKEN = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class CurationConfig:
    """Thresholds for the three curation stages."""

    semantic_threshold: float = 0.58
    min_author_tier: int = 1
    dedup_threshold: float = 0.70
    dedup_backend: str = "jaccard"  # or "embedding"
    shingle_size: int = 5

    def __post_init__(self) -> None:
        if not -1.0 <= self.semantic_threshold <= 1.0:
            raise ConfigInvalid("semantic_threshold must be in [-1, 1]")
        if not 0.0 <= self.dedup_threshold <= 1.0:
            raise ConfigInvalid("dedup_threshold must be in [0, 1]")
        if self.dedup_backend not in ("jaccard", "embedding"):
            raise ConfigInvalid("dedup_backend must be 'jaccard' or 'embedding'")
        if self.shingle_size < 1:
            raise ConfigInvalid("shingle_size must be positive")


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity; 0.0 when either vector is all-zero."""
    dot = 0.0
    norm_a = 0.0
    norm_b = 0.0
    for x, y in zip(a, b):
        dot += x * y
        norm_a += x * x
        norm_b += y * y
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / math.sqrt(norm_a * norm_b)


def semantic_relevance(pair: CodeMarkdownPair, provider: EmbeddingProvider) -> float:
    """Cosine similarity between the code and normalized markdown embeddings."""
    code_vec, markdown_vec = provider.embed([pair.code, pair.markdown_normalized])
    return cosine(code_vec, markdown_vec)


def passes_semantic(score: float, threshold: float) -> bool:
    """Keep decision for the semantic stage; the threshold is inclusive."""
    return score >= threshold


def tier_filter(pair: CodeMarkdownPair, min_author_tier: int) -> bool:
    """Keep iff the author's performance tier is at least the minimum."""
    return pair.provenance.author_tier >= min_author_tier


def code_shingles(code: str, size: int = 5) -> frozenset[tuple[str, ...]]:
    """Token shingles of sanitized code; shorter cells yield one shingle."""
    tokens = _CODE_TOKEN.findall(sanitize_cell_source(code))
    if not tokens:
        return frozenset()
    if len(tokens) < size:
        return frozenset({tuple(tokens)})
    return frozenset(
        tuple(tokens[i : i + size]) for i in range(len(tokens) - size + 1)
    )


def jaccard(a: frozenset, b: frozenset) -> float:
    """Jaccard similarity of two sets; two empty sets count as identical."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def near_duplicates(
    items: Sequence[tuple[str, str]],
    threshold: float,
    backend: str = "jaccard",
    provider: EmbeddingProvider | None = None,
    shingle_size: int = 5,
) -> list[list[str]]:
    """Partition (id, code) items into transitive duplicate groups.

    Two items join a group when their similarity is strictly above the
    threshold; groups close transitively. Every item appears in exactly one
    group; non-duplicates form singletons. Groups and members are sorted by
    id. Similarity is Jaccard over token shingles by default, or embedding
    cosine when backend="embedding" and a provider is given. Scoring is
    exhaustive over all pairs, which is fine at corpus scales up to ~1e4.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ConfigInvalid("dedup threshold must be in [0, 1]")
    ids = [item_id for item_id, _ in items]
    codes = [code for _, code in items]
    n = len(items)
    if backend == "embedding":
        if provider is None:
            raise ConfigInvalid("embedding dedup backend requires a provider")
        vectors = provider.embed(codes)

        def similarity(i: int, j: int) -> float:
            return cosine(vectors[i], vectors[j])

    else:
        shingles = [code_shingles(code, shingle_size) for code in codes]

        def similarity(i: int, j: int) -> float:
            return jaccard(shingles[i], shingles[j])

    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if similarity(i, j) > threshold:
                uf.union(i, j)

    grouped: dict[int, list[str]] = {}
    for i in range(n):
        grouped.setdefault(uf.find(i), []).append(ids[i])
    groups = [sorted(members) for members in grouped.values()]
    groups.sort(key=lambda members: members[0])
    return groups


def dedup_survivors(groups: Sequence[Sequence[str]]) -> tuple[set[str], set[str]]:
    """(kept, removed): the smallest id in each group survives."""
    kept: set[str] = set()
    removed: set[str] = set()
    for members in groups:
        ordered = sorted(members)
        kept.add(ordered[0])
        removed.update(ordered[1:])
    return kept, removed


@dataclass(frozen=True)
class StageReport:
    """What one curation stage did: counts in/out and the removed pair ids."""

    stage: str
    n_in: int
    n_out: int
    removed_ids: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "stage": self.stage,
            "in": self.n_in,
            "out": self.n_out,
            "removed": list(self.removed_ids),
        }


@dataclass(frozen=True)
class CurationResult:
    pairs: tuple[CodeMarkdownPair, ...]
    reports: tuple[StageReport, ...] = field(default_factory=tuple)

    def report_text(self) -> str:
        lines = ["curation stages:"]
        for report in self.reports:
            lines.append(
                f"  {report.stage:<10} {report.n_in:>6} -> {report.n_out:>6}"
                f"  (removed {report.n_in - report.n_out})"
            )
        return "\n".join(lines) + "\n"


def apply(
    pairs: Sequence[CodeMarkdownPair],
    config: CurationConfig,
    provider: EmbeddingProvider,
) -> CurationResult:
    """Run semantic -> tier -> dedup and report each stage.

    Fork-flagged pairs are dropped inside the dedup stage, before similarity
    grouping, so forks can never displace an original as a group survivor.
    """
    current = list(pairs)

    # Semantic relevance: batch-embed codes and markdowns once each.
    removed: list[str] = []
    if current:
        code_vectors = provider.embed([p.code for p in current])
        markdown_vectors = provider.embed([p.markdown_normalized for p in current])
        kept = []
        for pair, code_vec, markdown_vec in zip(current, code_vectors, markdown_vectors):
            score = cosine(code_vec, markdown_vec)
            if passes_semantic(score, config.semantic_threshold):
                kept.append(pair)
            else:
                removed.append(pair.pair_id)
    else:
        kept = []
    semantic_report = StageReport("semantic", len(current), len(kept), tuple(removed))
    current = kept

    removed = [
        p.pair_id for p in current if not tier_filter(p, config.min_author_tier)
    ]
    kept = [p for p in current if tier_filter(p, config.min_author_tier)]
    tier_report = StageReport("tier", len(current), len(kept), tuple(removed))
    current = kept

    n_in = len(current)
    forks = [p.pair_id for p in current if p.provenance.is_fork]
    survivors_input = [p for p in current if not p.provenance.is_fork]
    groups = near_duplicates(
        [(p.pair_id, p.code) for p in survivors_input],
        config.dedup_threshold,
        backend=config.dedup_backend,
        provider=provider if config.dedup_backend == "embedding" else None,
        shingle_size=config.shingle_size,
    )
    kept_ids, removed_ids = dedup_survivors(groups)
    kept = [p for p in survivors_input if p.pair_id in kept_ids]
    dedup_report = StageReport(
        "dedup", n_in, len(kept), tuple(forks) + tuple(sorted(removed_ids))
    )

    return CurationResult(
        pairs=tuple(kept),
        reports=(semantic_report, tier_report, dedup_report),
    )
