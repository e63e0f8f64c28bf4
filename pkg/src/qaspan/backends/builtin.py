"""Offline backends: identity and token-marking mock translators, lexical similarity."""

from __future__ import annotations

import re
import threading
from collections import Counter
from math import sqrt
from typing import Sequence

from .. import kernels
from .base import Translator, Transliterator

_TOKEN = re.compile(r"\S+")


class IdentityTranslator(Translator):
    name = "identity"

    def translate_batch(self, texts, src, tgt):
        return list(texts)


class MockTranslator(Translator):
    """Prefixes every whitespace-delimited token with a marker.

    Token i of the output is token i of the input, so a translated answer
    is always a verbatim substring of its translated sentence. Whitespace is
    kept as is. Counts requests so tests can check batching and caching.
    """

    name = "mock"

    def __init__(self, marker: str = "§"):
        self.marker = marker
        self.requests = 0
        self.texts_seen = 0
        self._lock = threading.Lock()

    def translate_batch(self, texts, src, tgt):
        with self._lock:
            self.requests += 1
            self.texts_seen += len(texts)
        return [_TOKEN.sub(lambda m: self.marker + m.group(0), t) for t in texts]


class IdentityTransliterator(Transliterator):
    name = "identity"

    def transliterate_batch(self, texts, tgt):
        return list(texts)


# -- similarity ---------------------------------------------------------------

def normalize_ws(text: str) -> str:
    return " ".join(text.split())


def char_ngrams(text: str, n: int = 3) -> Counter[str]:
    """Multiset of character n-grams; a non-empty string shorter than n is its own gram."""
    if not text:
        return Counter()
    if len(text) < n:
        return Counter([text])
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def cosine_counts(a: Counter, b: Counter) -> float:
    if len(a) > len(b):
        a, b = b, a
    dot = sum(c * b[g] for g, c in a.items() if g in b)
    if dot == 0:
        return 0.0
    na = sum(c * c for c in a.values())
    nb = sum(c * c for c in b.values())
    return dot / sqrt(na * nb)


class LexicalSimilarity:
    """Cosine over character-trigram counts of whitespace-normalized text."""

    name = "lexical"
    n = 3

    def similarity(self, a: str, b: str) -> float:
        a, b = normalize_ws(a), normalize_ws(b)
        if not a or not b:
            return 1.0 if a == b else 0.0
        return cosine_counts(char_ngrams(a, self.n), char_ngrams(b, self.n))

    def score_matrix(self, candidates: Sequence[str], target: str) -> list[float]:
        t = normalize_ws(target)
        if not t:
            return [1.0 if not normalize_ws(c) else 0.0 for c in candidates]
        tg = char_ngrams(t, self.n)
        out = []
        for c in candidates:
            c = normalize_ws(c)
            out.append(cosine_counts(char_ngrams(c, self.n), tg) if c else 0.0)
        return out

    def score_token_spans(self, tokens: Sequence[str], target: str,
                          max_tokens: int) -> list[float]:
        """Scores of all contiguous token spans, in (first, length) order.

        Equivalent to ``score_matrix`` over the joined spans, but computed
        incrementally by the compiled kernel.
        """
        t = normalize_ws(target)
        if not tokens:
            return []
        if len(t) < self.n:
            return self._short_target(tokens, t, max_tokens)
        return kernels.score_spans(*self._pack(tokens, t), max_tokens)

    def _pack(self, tokens: Sequence[str], t: str) -> tuple:
        """Kernel inputs: token offsets and gram ids over the space-joined tokens."""
        joined = " ".join(tokens)
        ids: dict[str, int] = {}
        gram_ids = []
        for p in range(len(joined) - self.n + 1):
            gram_ids.append(ids.setdefault(joined[p:p + self.n], len(ids)))
        ans_counts = [0] * len(ids)
        ans_norm2 = 0
        for g, c in char_ngrams(t, self.n).items():
            ans_norm2 += c * c
            gid = ids.get(g)
            if gid is not None:
                ans_counts[gid] = c
        starts, ends = [], []
        pos = 0
        for tok in tokens:
            starts.append(pos)
            pos += len(tok)
            ends.append(pos)
            pos += 1
        return starts, ends, gram_ids, ans_counts, len(ids), ans_norm2

    @staticmethod
    def _short_target(tokens, t, max_tokens):
        n = len(tokens)
        out = []
        for i in range(n):
            for j in range(i, min(n, i + max_tokens)):
                if not t:
                    out.append(0.0)
                else:
                    out.append(1.0 if " ".join(tokens[i:j + 1]) == t else 0.0)
        return out


class ExactMatchSimilarity:
    """1.0 when the whitespace-normalized strings are equal, else 0.0."""

    name = "exact"

    def similarity(self, a: str, b: str) -> float:
        return 1.0 if normalize_ws(a) == normalize_ws(b) else 0.0

    def score_matrix(self, candidates, target):
        t = normalize_ws(target)
        return [1.0 if normalize_ws(c) == t else 0.0 for c in candidates]
