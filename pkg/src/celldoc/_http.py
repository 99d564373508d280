"""HTTP plumbing: retries with exponential backoff, rate limiting.

Shared by the chat-completion client and the remote embedding provider.
API keys travel only in request headers and are never logged.
"""
from __future__ import annotations

import logging
import threading
import time
from typing import Any, Callable, Mapping

import httpx

from .errors import AuthError, ProviderError, RateLimited, Timeout

log = logging.getLogger(__name__)

SleepFn = Callable[[float], None]


class TokenBucket:
    """Simple token-bucket limiter: `rate` requests per second, burst `capacity`."""

    def __init__(self, rate: float, capacity: float, sleep: SleepFn = time.sleep):
        self.rate = rate
        self.capacity = capacity
        self._tokens = capacity
        self._stamp = time.monotonic()
        self._lock = threading.Lock()
        self._sleep = sleep

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(
                    self.capacity, self._tokens + (now - self._stamp) * self.rate
                )
                self._stamp = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


def post_json_with_retries(
    client: httpx.Client,
    url: str,
    payload: bytes,
    headers: Mapping[str, str],
    timeout: float,
    max_retries: int,
    backoff_base: float = 0.5,
    sleep: SleepFn = time.sleep,
) -> dict[str, Any]:
    """POST a JSON body, retrying 429 responses with exponential backoff.

    max_retries counts retries after the first attempt. 401/403 raise
    AuthError immediately; timeouts raise Timeout; other non-2xx statuses
    raise ProviderError; exhausted retries raise RateLimited carrying the
    attempt count.
    """
    attempts = 0
    while True:
        attempts += 1
        try:
            response = client.post(
                url, content=payload, headers=dict(headers), timeout=timeout
            )
        except httpx.TimeoutException as exc:
            raise Timeout(f"request to {url} timed out after {timeout}s") from exc
        except httpx.HTTPError as exc:
            raise ProviderError(f"request to {url} failed: {exc}") from exc

        if response.status_code == 429:
            if attempts > max_retries:
                raise RateLimited(
                    f"rate limited after {attempts} attempts", attempts=attempts
                )
            delay = backoff_base * (2 ** (attempts - 1))
            log.info("429 from endpoint, retry %d after %.2fs", attempts, delay)
            sleep(delay)
            continue
        if response.status_code in (401, 403):
            raise AuthError(f"endpoint rejected credentials ({response.status_code})")
        if response.status_code >= 400:
            raise ProviderError(
                f"endpoint returned {response.status_code}: {response.text[:200]}"
            )
        try:
            return response.json()
        except ValueError as exc:
            raise ProviderError(f"endpoint returned non-JSON body: {exc}") from exc
