"""Prompt rendering and chat-completion access.

Prompts are assembled from versioned template files shipped with the
package: an instruction block first, one triple-quote delimited example per
shot, and the query last with an explicit instruction to write the markdown
documentation. The with_metric variant adds the 21 metric lines to every
code block. Rendering is deterministic; completions are cached by (prompt
hash, model, temperature).
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

import httpx

from ._http import SleepFn, TokenBucket, post_json_with_retries
from .errors import AuthError, ConfigInvalid, MetricsUnavailable, ProviderError
from .ingest import CodeMarkdownPair
from .metrics import METRIC_COLUMNS, REAL_VALUED, TABLE_ABBREVIATIONS, MetricVector

log = logging.getLogger(__name__)

TEMPLATE_VERSION = "v1"
TEMPLATE_IDS = ("no_metric", "with_metric")

MetricsFn = Callable[[str], MetricVector]
Shot = CodeMarkdownPair | tuple[str, str]


def load_template(name: str) -> str:
    """Read a template file shipped in celldoc/templates."""
    return (
        resources.files("celldoc") / "templates" / f"{name}_{TEMPLATE_VERSION}.txt"
    ).read_text(encoding="utf-8")


def metric_lines(vector: MetricVector) -> list[str]:
    """The 21 `ABBREV: value` lines; integers bare, reals with 4 decimals."""
    lines = []
    for field, abbrev in zip(METRIC_COLUMNS, TABLE_ABBREVIATIONS):
        value = getattr(vector, field)
        if field in REAL_VALUED:
            lines.append(f"{abbrev}: {value:.4f}")
        else:
            lines.append(f"{abbrev}: {int(value)}")
    return lines


@dataclass(frozen=True)
class PromptSpec:
    """A fully rendered prompt plus the structure it came from."""

    template_id: str
    query_code: str
    query_metrics: MetricVector | None
    shots: tuple[tuple[str, MetricVector | None, str], ...]
    rendered: str

    @property
    def prompt_hash(self) -> str:
        return hashlib.sha256(self.rendered.encode("utf-8")).hexdigest()


def _shot_fields(shot: Shot) -> tuple[str, str]:
    if isinstance(shot, CodeMarkdownPair):
        return shot.code, shot.markdown_normalized
    code, markdown = shot
    return code, markdown


def render_prompt(
    query_code: str,
    shots: Sequence[Shot],
    template_id: str,
    metrics_fn: MetricsFn | None = None,
) -> PromptSpec:
    """Render a prompt for a query and its sampled shots, in shot order.

    shots may be CodeMarkdownPair objects (their normalized markdown is the
    example documentation) or plain (code, markdown) tuples. with_metric
    needs a metrics_fn to compute the metric block for the query and every
    shot; any extraction failure surfaces as MetricsUnavailable.
    """
    if template_id not in TEMPLATE_IDS:
        raise ConfigInvalid(f"unknown template_id {template_id!r}")
    template = load_template(template_id)
    example_template = load_template(f"example_{template_id}")

    def metrics_for(code: str) -> MetricVector:
        if metrics_fn is None:
            raise MetricsUnavailable("with_metric prompt requested without metrics_fn")
        try:
            return metrics_fn(code)
        except MetricsUnavailable:
            raise
        except Exception as exc:
            raise MetricsUnavailable(f"metric extraction failed: {exc}") from exc

    blocks: list[str] = []
    shot_triples: list[tuple[str, MetricVector | None, str]] = []
    for shot in shots:
        code, markdown = _shot_fields(shot)
        if template_id == "with_metric":
            vector = metrics_for(code)
            blocks.append(
                example_template.format(
                    code=code,
                    metrics="\n".join(metric_lines(vector)),
                    markdown=markdown,
                )
            )
            shot_triples.append((code, vector, markdown))
        else:
            blocks.append(example_template.format(code=code, markdown=markdown))
            shot_triples.append((code, None, markdown))

    if template_id == "with_metric":
        query_vector: MetricVector | None = metrics_for(query_code)
        rendered = template.format(
            examples="".join(blocks),
            query_code=query_code,
            query_metrics="\n".join(metric_lines(query_vector)),
        )
    else:
        query_vector = None
        rendered = template.format(examples="".join(blocks), query_code=query_code)

    return PromptSpec(
        template_id=template_id,
        query_code=query_code,
        query_metrics=query_vector,
        shots=tuple(shot_triples),
        rendered=rendered,
    )


# ---------------------------------------------------------------------------
# Completion client

@dataclass(frozen=True)
class LlmConfig:
    """Chat-completion endpoint settings. The key lives only in the env var."""

    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model_id: str = "gpt-3.5-turbo"
    temperature: float = 0.5
    max_retries: int = 3
    timeout: float = 30.0
    api_key_env: str = "OPENAI_API_KEY"
    backoff_base: float = 0.5
    requests_per_second: float | None = None
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ConfigInvalid("temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigInvalid("max_retries must be >= 0")


class CompletionCache:
    """File-per-response cache keyed by (prompt hash, model, temperature)."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(prompt_hash: str, model_id: str, temperature: float) -> str:
        raw = f"{prompt_hash}:{model_id}:{temperature!r}"
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        path = self._path(key)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["text"]

    def put(self, key: str, text: str) -> None:
        payload = json.dumps({"text": text}, sort_keys=True, ensure_ascii=False)
        self._path(key).write_text(payload, encoding="utf-8")


class ChatClient:
    """Shareable chat-completion client with rate limiting and retries."""

    def __init__(
        self,
        cfg: LlmConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: SleepFn = time.sleep,
    ):
        self.cfg = cfg
        self._client = httpx.Client(transport=transport)
        self._sleep = sleep
        self._bucket = (
            TokenBucket(cfg.requests_per_second, max(1.0, cfg.requests_per_second), sleep)
            if cfg.requests_per_second
            else None
        )
        self._slots = threading.BoundedSemaphore(max(1, cfg.max_in_flight))

    def _headers(self) -> dict[str, str]:
        key = os.environ.get(self.cfg.api_key_env)
        if not key:
            raise AuthError(
                f"environment variable {self.cfg.api_key_env} is not set"
            )
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def request_body(self, rendered: str) -> bytes:
        """Canonical request bytes; equal prompts give equal bodies."""
        return json.dumps(
            {
                "messages": [{"role": "user", "content": rendered}],
                "model": self.cfg.model_id,
                "temperature": self.cfg.temperature,
            },
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        ).encode("utf-8")

    def complete_text(self, rendered: str) -> str:
        prompt_hash = hashlib.sha256(rendered.encode("utf-8")).hexdigest()
        if self._bucket is not None:
            self._bucket.acquire()
        with self._slots:
            log.info(
                "completion request prompt_hash=%s model=%s",
                prompt_hash[:12],
                self.cfg.model_id,
            )
            body = post_json_with_retries(
                self._client,
                self.cfg.endpoint,
                self.request_body(rendered),
                self._headers(),
                timeout=self.cfg.timeout,
                max_retries=self.cfg.max_retries,
                backoff_base=self.cfg.backoff_base,
                sleep=self._sleep,
            )
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion response: {exc}") from exc
        if not isinstance(text, str):
            raise ProviderError("completion content is not text")
        log.info(
            "completion response prompt_hash=%s chars=%d",
            prompt_hash[:12],
            len(text),
        )
        return text.strip()


def complete_text(
    rendered: str,
    cfg: LlmConfig,
    client: ChatClient | None = None,
    cache: CompletionCache | None = None,
    cache_read: bool = True,
    transport: httpx.BaseTransport | None = None,
    sleep: SleepFn = time.sleep,
) -> str:
    """Send one rendered prompt, consulting the response cache first."""
    prompt_hash = hashlib.sha256(rendered.encode("utf-8")).hexdigest()
    key = CompletionCache.key(prompt_hash, cfg.model_id, cfg.temperature)
    if cache is not None and cache_read:
        hit = cache.get(key)
        if hit is not None:
            log.info("completion cache hit prompt_hash=%s", prompt_hash[:12])
            return hit
    if client is None:
        client = ChatClient(cfg, transport=transport, sleep=sleep)
    text = client.complete_text(rendered)
    if cache is not None:
        cache.put(key, text)
    return text


def complete(
    prompt: PromptSpec,
    cfg: LlmConfig,
    client: ChatClient | None = None,
    cache: CompletionCache | None = None,
    transport: httpx.BaseTransport | None = None,
    sleep: SleepFn = time.sleep,
) -> str:
    """Obtain the completion for a rendered prompt, stripped of whitespace."""
    return complete_text(
        prompt.rendered,
        cfg,
        client=client,
        cache=cache,
        transport=transport,
        sleep=sleep,
    )
