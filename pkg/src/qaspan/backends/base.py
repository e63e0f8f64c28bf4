"""Backend errors, configuration and the interfaces the pipeline talks to."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from ..languages import LanguageSpec


class BackendError(RuntimeError):
    pass


class BackendUnavailable(BackendError):
    """Remote service kept failing after all retries."""


class RateLimited(BackendError):
    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class EmptyTranslation(BackendError):
    """The service answered with an empty string."""


@dataclass(frozen=True)
class BackendConfig:
    endpoint: str | None = None
    cache_path: str | None = None
    max_retries: int = 5
    backoff_base: float = 0.5
    backoff_max: float = 30.0
    rate_limit: float = 0.0  # requests per second, 0 = unlimited
    batch_size: int = 32
    timeout: float = 30.0

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.rate_limit < 0:
            raise ValueError("rate_limit must be >= 0")


class Translator:
    """Base translator: subclasses implement ``translate_batch``.

    ``translate_batch`` may return empty strings; ``translate`` turns an empty
    result into :class:`EmptyTranslation`.
    """

    name = "translator"

    def translate_batch(self, texts: Sequence[str], src: LanguageSpec,
                        tgt: LanguageSpec) -> list[str]:
        raise NotImplementedError

    def translate(self, text: str, src: LanguageSpec, tgt: LanguageSpec) -> str:
        if not text.strip():
            raise ValueError("cannot translate blank text")
        out = self.translate_batch([text], src, tgt)[0]
        if not out.strip():
            raise EmptyTranslation(f"empty translation for {text[:60]!r}")
        return out


class Transliterator:
    name = "transliterator"

    def transliterate_batch(self, texts: Sequence[str], tgt: LanguageSpec) -> list[str]:
        raise NotImplementedError

    def transliterate(self, text: str, tgt: LanguageSpec) -> str:
        return self.transliterate_batch([text], tgt)[0]


@runtime_checkable
class Similarity(Protocol):
    name: str

    def similarity(self, a: str, b: str) -> float: ...

    def score_matrix(self, candidates: Sequence[str], target: str) -> list[float]: ...
