"""Pipeline configuration: YAML loading, validation, hashing, seed derivation.

One root seed drives every stage; per-stage seeds are derived by hashing
"{root_seed}:{stage}" so stages stay independently reproducible. The config
hash is a short digest of the canonical JSON form and is stamped into every
artifact header. API keys never appear here — only environment variable
names do.
"""
from __future__ import annotations

import glob as globlib
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .curation import CurationConfig
from .errors import ConfigInvalid
from .metrics import DEFAULT_VIZ_MODULES
from .prompting import TEMPLATE_IDS, LlmConfig
from .retrieval import SamplerConfig


@dataclass(frozen=True)
class InputConfig:
    """Where notebooks come from and how authorship metadata is attached."""

    notebook_globs: tuple[str, ...] = ()
    metadata_sidecar: str | None = None
    default_author_tier: int = 1


@dataclass(frozen=True)
class BoundsConfig:
    min_words: int = 4
    max_words: int = 281


@dataclass(frozen=True)
class EmbeddingConfig:
    """Embedding backend: deterministic hashing stub or a remote endpoint."""

    kind: str = "hash"  # "hash" | "http"
    dim: int = 384
    endpoint: str = "https://api.openai.com/v1/embeddings"
    model_id: str = "text-embedding-3-small"
    api_key_env: str = "OPENAI_API_KEY"


@dataclass(frozen=True)
class EvalConfig:
    strategy: str = "holdout"  # "holdout" | "kfold"
    fraction: float = 0.10
    folds: int = 10


@dataclass(frozen=True)
class PipelineConfig:
    input: InputConfig = field(default_factory=InputConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    curation: CurationConfig = field(default_factory=CurationConfig)
    sampler: SamplerConfig = field(
        default_factory=lambda: SamplerConfig(kind="combined_ir", n_shots=5)
    )
    generator: LlmConfig = field(default_factory=lambda: LlmConfig(temperature=0.5))
    judge: LlmConfig = field(default_factory=lambda: LlmConfig(temperature=0.0))
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    template_id: str = "with_metric"
    viz_allowlist: tuple[str, ...] = tuple(sorted(DEFAULT_VIZ_MODULES))
    output_dir: str = "out"
    cache_dir: str | None = None
    rng_seed: int = 0
    offline: bool = False


_SECTION_TYPES = {
    "input": InputConfig,
    "bounds": BoundsConfig,
    "curation": CurationConfig,
    "sampler": SamplerConfig,
    "generator": LlmConfig,
    "judge": LlmConfig,
    "embedding": EmbeddingConfig,
    "eval": EvalConfig,
}

_TUPLE_KEYS = {("input", "notebook_globs"), (None, "viz_allowlist")}


def _build_section(name: str, cls, raw: object):
    if not isinstance(raw, dict):
        raise ConfigInvalid(f"section {name!r} must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"unknown keys in {name!r}: {sorted(unknown)}")
    values = dict(raw)
    for key in list(values):
        if (name, key) in _TUPLE_KEYS and isinstance(values[key], list):
            values[key] = tuple(values[key])
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"invalid section {name!r}: {exc}") from exc


def config_from_dict(raw: dict) -> PipelineConfig:
    """Build and validate a PipelineConfig from plain mappings."""
    if not isinstance(raw, dict):
        raise ConfigInvalid("config root must be a mapping")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    values: dict = {}
    for name, cls in _SECTION_TYPES.items():
        if name in raw:
            values[name] = _build_section(name, cls, raw[name])
    for key in ("template_id", "output_dir", "cache_dir", "rng_seed", "offline"):
        if key in raw:
            values[key] = raw[key]
    if "viz_allowlist" in raw:
        allow = raw["viz_allowlist"]
        if not isinstance(allow, (list, tuple)):
            raise ConfigInvalid("viz_allowlist must be a list")
        values["viz_allowlist"] = tuple(allow)
    try:
        cfg = PipelineConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    validate(cfg)
    return cfg


def from_yaml(path: str | Path) -> PipelineConfig:
    """Load a pipeline config from a YAML file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    return config_from_dict(raw)


def validate(cfg: PipelineConfig) -> None:
    """Check cross-field constraints; raises ConfigInvalid."""
    if cfg.bounds.min_words < 0 or cfg.bounds.max_words < cfg.bounds.min_words:
        raise ConfigInvalid("bounds must satisfy 0 <= min_words <= max_words")
    if cfg.template_id not in TEMPLATE_IDS:
        raise ConfigInvalid(f"template_id must be one of {sorted(TEMPLATE_IDS)}")
    if cfg.embedding.kind not in ("hash", "http"):
        raise ConfigInvalid("embedding.kind must be 'hash' or 'http'")
    if cfg.embedding.dim <= 0:
        raise ConfigInvalid("embedding.dim must be positive")
    if cfg.eval.strategy not in ("holdout", "kfold"):
        raise ConfigInvalid("eval.strategy must be 'holdout' or 'kfold'")
    if not 0.0 < cfg.eval.fraction < 1.0:
        raise ConfigInvalid("eval.fraction must be in (0, 1)")
    if cfg.eval.folds < 2:
        raise ConfigInvalid("eval.folds must be at least 2")
    if cfg.input.default_author_tier < 0:
        raise ConfigInvalid("default_author_tier must be non-negative")
    if cfg.rng_seed < 0:
        raise ConfigInvalid("rng_seed must be non-negative")
    if cfg.judge.temperature != 0:
        raise ConfigInvalid("judge temperature must be 0")
    if cfg.input.metadata_sidecar is not None and not os.path.exists(
        cfg.input.metadata_sidecar
    ):
        raise ConfigInvalid(
            f"metadata sidecar does not exist: {cfg.input.metadata_sidecar}"
        )
    for pattern in cfg.input.notebook_globs:
        base = _glob_base(pattern)
        if base and not os.path.isdir(base):
            raise ConfigInvalid(f"notebook glob base does not exist: {base}")


def _glob_base(pattern: str) -> str:
    """Longest directory prefix of a glob pattern with no wildcard in it."""
    parts = Path(pattern).parts
    fixed = []
    for part in parts:
        if globlib.has_magic(part):
            break
        fixed.append(part)
    if fixed == list(parts):
        fixed = fixed[:-1]  # a literal path: its parent must exist
    return str(Path(*fixed)) if fixed else ""


def config_hash(cfg: PipelineConfig) -> str:
    """Short stable digest of the whole config, for artifact headers."""
    canonical = json.dumps(asdict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def derive_seed(root_seed: int, stage: str) -> int:
    """Stage-specific 64-bit seed derived from the root seed by hashing."""
    digest = hashlib.sha256(f"{root_seed}:{stage}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
