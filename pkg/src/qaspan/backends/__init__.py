"""Translation, transliteration, digit conversion and similarity backends."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from ..languages import LanguageSpec, convert_digits
from .base import (BackendConfig, BackendError, BackendUnavailable, EmptyTranslation,
                   RateLimited, Similarity, Translator, Transliterator)
from .builtin import (ExactMatchSimilarity, IdentityTranslator, IdentityTransliterator,
                      LexicalSimilarity, MockTranslator, char_ngrams, normalize_ws)
from .cache import ResponseCache, cache_key
from .remote import (HttpClient, RateLimiter, RemoteEmbeddingSimilarity, RemoteTranslator,
                     RemoteTransliterator)

log = logging.getLogger(__name__)

__all__ = [
    "BackendConfig", "BackendError", "BackendUnavailable", "EmptyTranslation", "RateLimited",
    "Similarity", "Translator", "Transliterator", "ExactMatchSimilarity", "IdentityTranslator",
    "IdentityTransliterator", "LexicalSimilarity", "MockTranslator", "ResponseCache",
    "HttpClient", "RateLimiter", "RemoteEmbeddingSimilarity", "RemoteTranslator",
    "RemoteTransliterator", "Backends", "make_backends", "similarity", "score_matrix",
    "transliterate", "convert_digits", "char_ngrams", "normalize_ws", "cache_key",
]

_LEXICAL = LexicalSimilarity()


def similarity(a: str, b: str) -> float:
    """Built-in lexical similarity (character-trigram cosine)."""
    return _LEXICAL.similarity(a, b)


def score_matrix(candidates: Sequence[str], target: str) -> list[float]:
    return _LEXICAL.score_matrix(candidates, target)


def _digits_only(text: str) -> bool:
    stripped = "".join(text.split())
    return bool(stripped) and all(c.isdigit() or not c.isalnum() for c in stripped) \
        and any(c.isdigit() for c in stripped)


_warned_identity = False


def transliterate(text: str, tgt: LanguageSpec,
                  backend: Transliterator | None = None) -> str:
    """Render ``text`` in the target script.

    Digit-only strings never reach the backend; they go through
    :func:`convert_digits`. Without a backend the text passes through
    unchanged.
    """
    global _warned_identity
    if _digits_only(text):
        return convert_digits(text, tgt)
    if backend is None:
        if not _warned_identity:
            log.info("no transliteration backend configured, passing text through")
            _warned_identity = True
        return text
    return backend.transliterate(text, tgt)


@dataclass
class Backends:
    translator: Translator = field(default_factory=IdentityTranslator)
    similarity: Similarity = field(default_factory=LexicalSimilarity)
    transliterator: Transliterator | None = None


def make_backends(translator: str = "identity", similarity: str = "lexical",
                  transliterator: str | None = None,
                  config: BackendConfig | None = None,
                  translit_config: BackendConfig | None = None,
                  similarity_config: BackendConfig | None = None,
                  mock_marker: str = "§") -> Backends:
    config = config or BackendConfig()
    if translator == "identity":
        tr: Translator = IdentityTranslator()
    elif translator == "mock":
        tr = MockTranslator(mock_marker)
    elif translator == "remote":
        tr = RemoteTranslator(config)
    else:
        raise ValueError(f"unknown translator backend {translator!r}")

    if similarity == "lexical":
        sim: Similarity = LexicalSimilarity()
    elif similarity == "exact":
        sim = ExactMatchSimilarity()
    elif similarity == "embedding":
        sim = RemoteEmbeddingSimilarity(similarity_config or config)
    else:
        raise ValueError(f"unknown similarity backend {similarity!r}")

    if transliterator in (None, "none"):
        tl = None
    elif transliterator == "identity":
        tl = IdentityTransliterator()
    elif transliterator == "remote":
        tl = RemoteTransliterator(translit_config or config)
    else:
        raise ValueError(f"unknown transliteration backend {transliterator!r}")
    return Backends(tr, sim, tl)
