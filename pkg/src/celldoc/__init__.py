"""Curate notebook (code, markdown) pairs, measure code structure, retrieve
few-shot exemplars, generate cell documentation, and evaluate it.

The modules mirror the pipeline: ingest -> curation -> metrics -> retrieval
-> prompting -> evaluation, with a config layer and a CLI on top. Everything
runs fully offline with deterministic providers; network providers plug in
through the same interfaces.
"""
from __future__ import annotations

from ._version import __version__
from .config import PipelineConfig, config_hash, derive_seed, from_yaml
from .curation import CurationConfig, CurationResult, apply as curate
from .errors import (
    AuthError,
    CelldocError,
    ConfigInvalid,
    CorpusTooSmall,
    EmptyCorpus,
    EmptyRun,
    InvalidBounds,
    MalformedNotebook,
    MetricsUnavailable,
    MissingEmbeddings,
    ParseError,
    ProviderError,
    ProviderUnavailable,
    RateLimited,
    StageFailed,
    Timeout,
    TooFewPairs,
    UnparseableJudgeOutput,
    UnsupportedFormatVersion,
)
from .evaluation import (
    EvalReport,
    GenerationRecord,
    JudgeScore,
    WilcoxonResult,
    aggregate_report,
    bleu,
    judge,
    make_splits,
    rouge,
    tokenize_for_eval,
    wilcoxon_signed_rank,
)
from .ingest import (
    CodeMarkdownPair,
    NotebookCell,
    PairProvenance,
    length_filter,
    normalize_markdown,
    pair_cells,
    parse_notebook,
)
from .metrics import (
    METRIC_COLUMNS,
    TABLE_ABBREVIATIONS,
    MetricVector,
    PopularityTable,
    build_popularity_table,
    extract_metrics,
)
from .prompting import LlmConfig, PromptSpec, complete, render_prompt
from .providers import EmbeddingProvider, HashingEmbedder, HttpEmbedder
from .retrieval import (
    CorpusIndex,
    SamplerConfig,
    build_index,
    load_index,
    save_index,
    top_k,
)

__all__ = [
    "__version__",
    # config
    "PipelineConfig", "config_hash", "derive_seed", "from_yaml",
    # ingest
    "NotebookCell", "PairProvenance", "CodeMarkdownPair",
    "parse_notebook", "pair_cells", "normalize_markdown", "length_filter",
    # metrics
    "TABLE_ABBREVIATIONS", "METRIC_COLUMNS", "MetricVector",
    "PopularityTable", "build_popularity_table", "extract_metrics",
    # curation
    "CurationConfig", "CurationResult", "curate",
    # retrieval
    "SamplerConfig", "CorpusIndex", "build_index", "top_k",
    "save_index", "load_index",
    # prompting
    "PromptSpec", "LlmConfig", "render_prompt", "complete",
    # providers
    "EmbeddingProvider", "HashingEmbedder", "HttpEmbedder",
    # evaluation
    "tokenize_for_eval", "bleu", "rouge", "wilcoxon_signed_rank",
    "WilcoxonResult", "make_splits", "GenerationRecord", "EvalReport",
    "aggregate_report", "JudgeScore", "judge",
    # errors
    "CelldocError", "MalformedNotebook", "UnsupportedFormatVersion",
    "InvalidBounds", "ParseError", "EmptyCorpus", "MissingEmbeddings",
    "ProviderUnavailable", "AuthError", "RateLimited", "Timeout",
    "ProviderError", "MetricsUnavailable", "TooFewPairs", "CorpusTooSmall",
    "UnparseableJudgeOutput", "EmptyRun", "ConfigInvalid", "StageFailed",
]
