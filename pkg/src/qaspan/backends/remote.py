"""HTTP backends with batching, on-disk caching, rate limiting and retry.

Wire contract (translation): one POST per batch with JSON
``{"texts": [...], "source": "<code>", "target": "<code>"}`` answered by
``{"translations": [...]}`` aligned with the input. Transliteration uses the
same request shape and accepts either ``transliterations`` or
``translations`` in the reply. Embedding similarity posts ``{"texts": [...]}``
and expects ``{"embeddings": [[...], ...]}``.
"""

from __future__ import annotations

import logging
import math
import random
import threading
import time
from typing import Any, Callable, Sequence

import requests

from ..languages import LanguageSpec
from .base import (BackendConfig, BackendUnavailable, RateLimited, Translator,
                   Transliterator)
from .cache import ResponseCache, cache_key

log = logging.getLogger(__name__)

RETRYABLE_STATUS = {408, 500, 502, 503, 504}


class RateLimiter:
    """Spaces calls at least ``1 / rate`` seconds apart across threads."""

    def __init__(self, rate: float, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.interval = 1.0 / rate if rate > 0 else 0.0
        self._clock = clock
        self._sleep = sleep
        self._next = 0.0
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if not self.interval:
            return
        with self._lock:
            now = self._clock()
            wait = self._next - now
            self._next = max(now, self._next) + self.interval
        if wait > 0:
            self._sleep(wait)


class HttpClient:
    def __init__(self, config: BackendConfig, session: requests.Session | None = None,
                 sleep: Callable[[float], None] = time.sleep, seed: int = 0):
        if not config.endpoint:
            raise ValueError("remote backend needs an endpoint")
        self.config = config
        self.session = session or requests.Session()
        self.limiter = RateLimiter(config.rate_limit, sleep=sleep)
        self._sleep = sleep
        self._rng = random.Random(seed)
        self.requests_sent = 0
        self._count_lock = threading.Lock()

    def _backoff(self, attempt: int) -> float:
        base = min(self.config.backoff_max, self.config.backoff_base * 2 ** attempt)
        return base * (0.5 + self._rng.random() / 2)

    def post(self, payload: dict[str, Any]) -> dict[str, Any]:
        cfg = self.config
        last_error = "no attempt made"
        for attempt in range(cfg.max_retries + 1):
            self.limiter.acquire()
            with self._count_lock:
                self.requests_sent += 1
            try:
                resp = self.session.post(cfg.endpoint, json=payload, timeout=cfg.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = f"{type(exc).__name__}: {exc}"
                delay = self._backoff(attempt)
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()
                    except ValueError:
                        last_error = "response is not JSON"
                        delay = self._backoff(attempt)
                elif resp.status_code == 429:
                    retry_after = _retry_after(resp)
                    if attempt == cfg.max_retries:
                        raise RateLimited(f"rate limited by {cfg.endpoint}", retry_after)
                    last_error = "HTTP 429"
                    delay = retry_after if retry_after is not None else self._backoff(attempt)
                elif resp.status_code in RETRYABLE_STATUS:
                    last_error = f"HTTP {resp.status_code}"
                    delay = self._backoff(attempt)
                else:
                    raise BackendUnavailable(
                        f"{cfg.endpoint} answered HTTP {resp.status_code}: {resp.text[:200]}")
            if attempt < cfg.max_retries:
                log.info("request to %s failed (%s), retry %d/%d in %.2fs",
                         cfg.endpoint, last_error, attempt + 1, cfg.max_retries, delay)
                self._sleep(delay)
        raise BackendUnavailable(
            f"{cfg.endpoint} failed after {cfg.max_retries + 1} attempts: {last_error}")


def _retry_after(resp: requests.Response) -> float | None:
    value = resp.headers.get("Retry-After")
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        return None


class _CachedBatcher:
    """Looks texts up in the cache and posts only the misses, in batches."""

    def __init__(self, kind: str, config: BackendConfig, client: HttpClient | None,
                 cache: ResponseCache | None):
        self.kind = kind
        self.config = config
        self.client = client or HttpClient(config)
        self.cache = cache if cache is not None else ResponseCache(config.cache_path)

    def run(self, texts: Sequence[str], src: str, tgt: str, field: str,
            alt_field: str | None = None) -> list[str]:
        keys = [cache_key(self.kind, t, src, tgt) for t in texts]
        out: list[str | None] = [self.cache.get(k) for k in keys]
        missing: dict[str, list[int]] = {}
        for i, (k, v) in enumerate(zip(keys, out)):
            if v is None:
                missing.setdefault(k, []).append(i)
        pending = list(missing)
        bs = self.config.batch_size
        for b in range(0, len(pending), bs):
            chunk = pending[b:b + bs]
            batch_texts = [texts[missing[k][0]] for k in chunk]
            reply = self.client.post({"texts": batch_texts, "source": src, "target": tgt})
            results = reply.get(field)
            if results is None and alt_field:
                results = reply.get(alt_field)
            if not isinstance(results, list) or len(results) != len(batch_texts):
                raise BackendUnavailable(
                    f"{self.kind}: malformed reply, expected {len(batch_texts)} items in {field!r}")
            for k, text, res in zip(chunk, batch_texts, results):
                res = "" if res is None else str(res)
                res = self.cache.put(k, {"kind": self.kind, "text": text, "source": src,
                                         "target": tgt}, res)
                for i in missing[k]:
                    out[i] = res
        return out  # type: ignore[return-value]


class RemoteTranslator(Translator):
    name = "remote"

    def __init__(self, config: BackendConfig, client: HttpClient | None = None,
                 cache: ResponseCache | None = None):
        self._batcher = _CachedBatcher("translate", config, client, cache)

    @property
    def client(self) -> HttpClient:
        return self._batcher.client

    def translate_batch(self, texts, src: LanguageSpec, tgt: LanguageSpec):
        return self._batcher.run(texts, src.code, tgt.code, "translations")


class RemoteTransliterator(Transliterator):
    name = "remote"

    def __init__(self, config: BackendConfig, client: HttpClient | None = None,
                 cache: ResponseCache | None = None, source: str = "en"):
        self._batcher = _CachedBatcher("transliterate", config, client, cache)
        self.source = source

    @property
    def client(self) -> HttpClient:
        return self._batcher.client

    def transliterate_batch(self, texts, tgt: LanguageSpec):
        return self._batcher.run(texts, self.source, tgt.code, "transliterations",
                                 alt_field="translations")


class RemoteEmbeddingSimilarity:
    """Cosine of service-provided embeddings, clipped to [0, 1]."""

    name = "embedding"

    def __init__(self, config: BackendConfig, client: HttpClient | None = None):
        self.config = config
        self.client = client or HttpClient(config)
        self._memo: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def _embed(self, texts: Sequence[str]) -> list[list[float]]:
        todo = sorted({t for t in texts if t not in self._memo})
        bs = self.config.batch_size
        for b in range(0, len(todo), bs):
            chunk = todo[b:b + bs]
            reply = self.client.post({"texts": chunk})
            vecs = reply.get("embeddings")
            if not isinstance(vecs, list) or len(vecs) != len(chunk):
                raise BackendUnavailable("embedding reply malformed")
            with self._lock:
                for t, v in zip(chunk, vecs):
                    self._memo[t] = [float(x) for x in v]
        return [self._memo[t] for t in texts]

    @staticmethod
    def _cos(u, v) -> float:
        dot = sum(a * b for a, b in zip(u, v))
        nu = math.sqrt(sum(a * a for a in u))
        nv = math.sqrt(sum(b * b for b in v))
        if nu == 0 or nv == 0:
            return 0.0
        return min(1.0, max(0.0, dot / (nu * nv)))

    def similarity(self, a: str, b: str) -> float:
        if not a or not b:
            return 1.0 if a == b else 0.0
        if a == b:
            return 1.0
        u, v = self._embed([a, b])
        return self._cos(u, v)

    def score_matrix(self, candidates, target):
        vecs = self._embed(list(candidates) + [target])
        t = vecs[-1]
        return [1.0 if c == target else self._cos(v, t) for c, v in zip(candidates, vecs)]
