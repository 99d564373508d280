"""Embedding providers: a deterministic offline stub and a remote HTTP client.

Both satisfy the same interface: embed(texts) returns one fixed-dimension
vector per input text, and model_id names the backing model.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
from typing import Protocol, Sequence

import httpx

from ._http import post_json_with_retries
from .errors import AuthError, ProviderUnavailable

_TOKEN = re.compile(r"[A-Za-z0-9_]+")


class EmbeddingProvider(Protocol):
    """Maps texts to fixed-dimension real vectors."""

    model_id: str

    def embed(self, texts: Sequence[str]) -> list[list[float]]: ...


class HashingEmbedder:
    """Deterministic bag-of-words embedder for offline runs and tests.

    Each lowercased word token adds 1.0 to the coordinate selected by a
    stable hash of the token. No randomness, no network; equal texts always
    get equal vectors.
    """

    def __init__(self, dim: int = 384):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.model_id = f"hash-bow-{dim}"
        self._bucket_cache: dict[str, int] = {}

    def bucket(self, token: str) -> int:
        """The coordinate a token contributes to."""
        cached = self._bucket_cache.get(token)
        if cached is None:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            cached = int.from_bytes(digest[:8], "little") % self.dim
            self._bucket_cache[token] = cached
        return cached

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        vectors = []
        for text in texts:
            vector = [0.0] * self.dim
            for token in _TOKEN.findall(text.lower()):
                vector[self.bucket(token)] += 1.0
            vectors.append(vector)
        return vectors


class HttpEmbedder:
    """Remote embedding endpoint speaking the common embeddings protocol.

    Request: {"model": model_id, "input": [texts]}; response: {"data":
    [{"embedding": [...]}, ...]} in input order. Failures surface as
    ProviderUnavailable after the retry policy; credential rejections stay
    AuthError.
    """

    def __init__(
        self,
        endpoint: str,
        model_id: str,
        api_key_env: str = "OPENAI_API_KEY",
        timeout: float = 30.0,
        max_retries: int = 3,
        batch_size: int = 64,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.max_retries = max_retries
        self.batch_size = batch_size
        self._client = httpx.Client(transport=transport)

    def _headers(self) -> dict[str, str]:
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        vectors: list[list[float]] = []
        for start in range(0, len(texts), self.batch_size):
            batch = list(texts[start : start + self.batch_size])
            payload = json.dumps(
                {"model": self.model_id, "input": batch},
                sort_keys=True,
                separators=(",", ":"),
            ).encode("utf-8")
            try:
                body = post_json_with_retries(
                    self._client,
                    self.endpoint,
                    payload,
                    self._headers(),
                    timeout=self.timeout,
                    max_retries=self.max_retries,
                )
            except AuthError:
                raise
            except Exception as exc:
                raise ProviderUnavailable(f"embedding endpoint failed: {exc}") from exc
            data = body.get("data")
            if not isinstance(data, list) or len(data) != len(batch):
                raise ProviderUnavailable(
                    "embedding endpoint returned a malformed data list"
                )
            for item in data:
                vectors.append([float(x) for x in item["embedding"]])
        return vectors
