"""Exemplar retrieval over curated pairs.

An immutable index stores each pair's 21-metric vector (raw and min-max
normalized) and optionally an L2-normalized embedding matrix. Five samplers
serve top-k retrieval: zero_shot, random_shot, embedding_ir, cm_ir, and
combined_ir (alpha-weighted blend of embedding and metric similarity).
Scoring is exhaustive; ranking is descending score with ties broken by
ascending pair id.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigInvalid, EmptyCorpus, MissingEmbeddings
from .ingest import CodeMarkdownPair
from .metrics import (
    DEFAULT_VIZ_MODULES,
    METRIC_COLUMNS,
    MetricVector,
    PopularityTable,
    extract_metrics,
    sanitize_cell_source,
)
from .providers import EmbeddingProvider

SAMPLER_KINDS = ("zero_shot", "random_shot", "embedding_ir", "cm_ir", "combined_ir")

INDEX_MAGIC = b"CDIX"
INDEX_VERSION = 1


@dataclass(frozen=True)
class NormalizationStats:
    """Per-metric min and max over the index corpus."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    @property
    def constant_columns(self) -> tuple[bool, ...]:
        return tuple(lo == hi for lo, hi in zip(self.mins, self.maxs))


@dataclass(frozen=True)
class SamplerConfig:
    """Which sampler to use and how many shots to retrieve."""

    kind: str
    n_shots: int
    alpha: float = 0.5
    rng_seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in SAMPLER_KINDS:
            raise ConfigInvalid(f"unknown sampler kind {self.kind!r}")
        if self.n_shots not in (0, 1, 5, 10):
            raise ConfigInvalid("n_shots must be one of 0, 1, 5, 10")
        if self.kind == "zero_shot" and self.n_shots != 0:
            raise ConfigInvalid("zero_shot requires n_shots=0")
        if self.kind != "zero_shot" and self.n_shots == 0:
            raise ConfigInvalid(f"{self.kind} requires n_shots > 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigInvalid("alpha must be in [0, 1]")


@dataclass(frozen=True)
class CorpusIndex:
    """Immutable retrieval structure over curated pairs.

    pair_ids is the canonical content; `pairs` carries the full objects when
    the index was built in-process or attached after loading from disk.
    """

    pair_ids: tuple[str, ...]
    raw_matrix: np.ndarray  # N x 21 float64
    norm_matrix: np.ndarray  # N x 21 float64 in [0, 1]
    stats: NormalizationStats
    popularity: PopularityTable
    embedding_matrix: np.ndarray | None = None  # N x D float64, unit rows
    pairs: tuple[CodeMarkdownPair, ...] | None = None

    def __len__(self) -> int:
        return len(self.pair_ids)

    def with_pairs(self, pairs: Sequence[CodeMarkdownPair]) -> "CorpusIndex":
        """Attach pair objects (required by top_k) after loading from disk."""
        by_id = {pair.pair_id: pair for pair in pairs}
        missing = [pid for pid in self.pair_ids if pid not in by_id]
        if missing:
            raise ConfigInvalid(
                f"pair file does not cover index ids (first missing: {missing[0]})"
            )
        ordered = tuple(by_id[pid] for pid in self.pair_ids)
        return CorpusIndex(
            pair_ids=self.pair_ids,
            raw_matrix=self.raw_matrix,
            norm_matrix=self.norm_matrix,
            stats=self.stats,
            popularity=self.popularity,
            embedding_matrix=self.embedding_matrix,
            pairs=ordered,
        )


def fit_normalizer(raw_matrix: np.ndarray) -> NormalizationStats:
    """Per-column min/max over the corpus. Raises EmptyCorpus on no rows."""
    if raw_matrix.shape[0] == 0:
        raise EmptyCorpus("cannot fit a normalizer on an empty matrix")
    mins = raw_matrix.min(axis=0)
    maxs = raw_matrix.max(axis=0)
    return NormalizationStats(
        mins=tuple(float(x) for x in mins), maxs=tuple(float(x) for x in maxs)
    )


def normalize(
    vector: MetricVector | Sequence[float] | np.ndarray, stats: NormalizationStats
) -> np.ndarray:
    """Min-max normalize into [0, 1].

    Constant columns map to 0; values outside the fitted range (possible for
    queries) are clamped into [0, 1].
    """
    row = np.asarray(
        vector.as_row() if isinstance(vector, MetricVector) else vector,
        dtype=np.float64,
    )
    mins = np.asarray(stats.mins)
    maxs = np.asarray(stats.maxs)
    span = maxs - mins
    constant = span == 0.0
    safe_span = np.where(constant, 1.0, span)
    scaled = (row - mins) / safe_span
    scaled = np.where(constant, 0.0, scaled)
    return np.clip(scaled, 0.0, 1.0)


def cm_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity of two normalized metric vectors; 0 for zero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    norm_a = float(np.dot(a, a))
    norm_b = float(np.dot(b, b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b)) / math.sqrt(norm_a * norm_b)


def combined_similarity(emb_sim: float, cm_sim: float, alpha: float) -> float:
    """alpha-weighted blend; alpha=1 is embedding only, alpha=0 metrics only."""
    return alpha * emb_sim + (1.0 - alpha) * cm_sim


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.sqrt((matrix * matrix).sum(axis=1))
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe[:, np.newaxis]


def build_index(
    pairs: Sequence[CodeMarkdownPair],
    popularity: PopularityTable,
    provider: EmbeddingProvider | None = None,
    viz_allowlist: frozenset[str] = DEFAULT_VIZ_MODULES,
) -> CorpusIndex:
    """Extract metrics for every pair and assemble the retrieval index.

    When a provider is given, code embeddings are computed and L2-normalized
    so dot products are cosines. Build order follows the input order; the
    build is deterministic for a fixed corpus and provider.
    """
    if not pairs:
        raise EmptyCorpus("cannot build an index over zero pairs")
    rows = []
    for pair in pairs:
        vector = extract_metrics(
            sanitize_cell_source(pair.code),
            popularity,
            pair.cell_meta,
            viz_allowlist=viz_allowlist,
        )
        rows.append(vector.as_row())
    raw = np.array(rows, dtype=np.float64)
    stats = fit_normalizer(raw)
    norm = np.vstack([normalize(raw[i], stats) for i in range(raw.shape[0])])

    embedding = None
    if provider is not None:
        embedding = np.array(provider.embed([p.code for p in pairs]), dtype=np.float64)
        embedding = _unit_rows(embedding)

    return CorpusIndex(
        pair_ids=tuple(pair.pair_id for pair in pairs),
        raw_matrix=raw,
        norm_matrix=norm,
        stats=stats,
        popularity=popularity,
        embedding_matrix=embedding,
        pairs=tuple(pairs),
    )


def _query_metric_vector(query_code: str, index: CorpusIndex) -> np.ndarray:
    vector = extract_metrics(
        sanitize_cell_source(query_code), index.popularity, None
    )
    return normalize(vector, index.stats)


def _embedding_scores(
    query_code: str, index: CorpusIndex, provider: EmbeddingProvider | None
) -> np.ndarray:
    if index.embedding_matrix is None or provider is None:
        raise MissingEmbeddings(
            "embedding-based sampling needs an embedding matrix and a provider"
        )
    query = np.asarray(provider.embed([query_code])[0], dtype=np.float64)
    norm = float(np.dot(query, query))
    if norm == 0.0:
        return np.zeros(len(index.pair_ids))
    return index.embedding_matrix @ (query / math.sqrt(norm))


def _metric_scores(query_code: str, index: CorpusIndex) -> np.ndarray:
    query = _query_metric_vector(query_code, index)
    q_norm = float(np.dot(query, query))
    if q_norm == 0.0:
        return np.zeros(len(index.pair_ids))
    dots = index.norm_matrix @ query
    row_norms = (index.norm_matrix * index.norm_matrix).sum(axis=1)
    denom = np.sqrt(row_norms * q_norm)
    scores = np.where(row_norms == 0.0, 0.0, dots / np.where(denom == 0.0, 1.0, denom))
    return scores


def top_k(
    query_code: str,
    index: CorpusIndex,
    cfg: SamplerConfig,
    provider: EmbeddingProvider | None = None,
    exclude_ids: frozenset[str] | set[str] = frozenset(),
) -> list[CodeMarkdownPair]:
    """Retrieve up to n_shots exemplar pairs for a code query.

    The query's own pair is excluded: any indexed pair whose code equals the
    query text byte-for-byte, plus everything in exclude_ids (the generate
    stage passes the held-out ids so shots come from training data only).
    IR kinds rank by descending score with ties broken by ascending pair id;
    random_shot samples uniformly without replacement under the config seed.
    """
    if index.pairs is None:
        raise ConfigInvalid("index has no attached pairs; call with_pairs first")
    if cfg.kind == "zero_shot":
        return []

    candidates = [
        i
        for i, pair in enumerate(index.pairs)
        if pair.pair_id not in exclude_ids and pair.code != query_code
    ]
    if not candidates:
        return []

    if cfg.kind == "random_shot":
        rng = np.random.default_rng(cfg.rng_seed)
        chosen = rng.choice(
            len(candidates), size=min(cfg.n_shots, len(candidates)), replace=False
        )
        return [index.pairs[candidates[int(i)]] for i in chosen]

    if cfg.kind == "cm_ir":
        scores = _metric_scores(query_code, index)
    elif cfg.kind == "embedding_ir":
        scores = _embedding_scores(query_code, index, provider)
    elif cfg.kind == "combined_ir":
        emb = _embedding_scores(query_code, index, provider)
        cm = _metric_scores(query_code, index)
        scores = cfg.alpha * emb + (1.0 - cfg.alpha) * cm
    else:  # pragma: no cover - SamplerConfig validates kinds
        raise ConfigInvalid(f"unknown sampler kind {cfg.kind!r}")

    ranked = sorted(
        candidates, key=lambda i: (-float(scores[i]), index.pair_ids[i])
    )
    return [index.pairs[i] for i in ranked[: cfg.n_shots]]


# ---------------------------------------------------------------------------
# Serialization (format documented in docs/index_format.md)

def save_index(
    index: CorpusIndex,
    path: str,
    tool_version: str = "",
    config_hash: str = "",
    seed: int | None = None,
) -> None:
    """Write the index: magic, version, JSON header, row-major float64 matrices."""
    header = {
        "n": len(index.pair_ids),
        "columns": list(METRIC_COLUMNS),
        "embedding_dim": (
            None
            if index.embedding_matrix is None
            else int(index.embedding_matrix.shape[1])
        ),
        "pair_ids": list(index.pair_ids),
        "stats": {"mins": list(index.stats.mins), "maxs": list(index.stats.maxs)},
        "popularity": {
            "counts": index.popularity.counts,
            "total_imports": index.popularity.total_imports,
        },
        "tool_version": tool_version,
        "config_hash": config_hash,
        "seed": seed,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode(
        "utf-8"
    )
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("<HI", INDEX_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(np.ascontiguousarray(index.raw_matrix, dtype="<f8").tobytes())
        if index.embedding_matrix is not None:
            fh.write(np.ascontiguousarray(index.embedding_matrix, dtype="<f8").tobytes())


def load_index(
    path: str, pairs: Sequence[CodeMarkdownPair] | None = None
) -> CorpusIndex:
    """Read an index file; optionally attach pair objects for top_k."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != INDEX_MAGIC:
        raise ConfigInvalid(f"{path} is not an index file")
    version, header_len = struct.unpack("<HI", blob[4:10])
    if version != INDEX_VERSION:
        raise ConfigInvalid(f"unsupported index version {version}")
    header = json.loads(blob[10 : 10 + header_len].decode("utf-8"))
    n = header["n"]
    columns = len(header["columns"])
    offset = 10 + header_len
    raw_size = n * columns * 8
    raw = np.frombuffer(blob[offset : offset + raw_size], dtype="<f8").reshape(
        n, columns
    )
    offset += raw_size
    embedding = None
    if header["embedding_dim"] is not None:
        dim = header["embedding_dim"]
        emb_size = n * dim * 8
        embedding = np.frombuffer(blob[offset : offset + emb_size], dtype="<f8").reshape(
            n, dim
        )
    stats = NormalizationStats(
        mins=tuple(header["stats"]["mins"]), maxs=tuple(header["stats"]["maxs"])
    )
    norm = np.vstack([normalize(raw[i], stats) for i in range(n)]) if n else raw.copy()
    index = CorpusIndex(
        pair_ids=tuple(header["pair_ids"]),
        raw_matrix=raw,
        norm_matrix=norm,
        stats=stats,
        popularity=PopularityTable(
            counts=dict(header["popularity"]["counts"]),
            total_imports=header["popularity"]["total_imports"],
        ),
        embedding_matrix=embedding,
        pairs=None,
    )
    if pairs is not None:
        index = index.with_pairs(pairs)
    return index
