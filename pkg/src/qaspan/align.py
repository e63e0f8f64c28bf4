"""Recover an answer span inside a translated sentence.

The sentence is cut into whitespace tokens, every contiguous token span up to
``max_tokens`` long is scored against the translated answer, the best span is
kept (ties go to the shortest, then leftmost span), and it is then widened one
neighbouring word at a time while the score stays within ``tolerance`` of the
best seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, NamedTuple, Sequence

from .backends.base import Similarity


class NoAlignment(ValueError):
    def __init__(self, best_score: float, min_score: float):
        super().__init__(f"best span score {best_score:.4f} below min_score {min_score}")
        self.best_score = best_score
        self.min_score = min_score


class Token(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenizedSentence:
    text: str
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def span_text(self, first: int, last: int) -> str:
        return self.text[self.tokens[first].start:self.tokens[last].end]


@dataclass(frozen=True)
class AlignmentCandidate:
    first_token: int
    last_token: int
    text: str
    score: float | None = None

    @property
    def length(self) -> int:
        return self.last_token - self.first_token + 1


@dataclass(frozen=True)
class AlignmentResult:
    span_text: str
    char_start: int
    char_end: int
    score: float
    extended: bool
    exact_match: bool


@dataclass(frozen=True)
class AlignConfig:
    max_tokens: int = 40
    tolerance: float = 0.01
    tolerance_mode: str = "relative"  # or "absolute"
    # compare extensions against the running maximum or the base span's score
    extend_reference: str = "running"
    min_score: float = 0.5

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if not 0 <= self.tolerance < 1:
            raise ValueError("tolerance must be in [0, 1)")
        if self.tolerance_mode not in ("relative", "absolute"):
            raise ValueError(f"tolerance_mode must be relative or absolute, not {self.tolerance_mode!r}")
        if self.extend_reference not in ("running", "base"):
            raise ValueError(f"extend_reference must be running or base, not {self.extend_reference!r}")
        if not 0 <= self.min_score <= 1:
            raise ValueError("min_score must be in [0, 1]")


def tokenize(sentence: str) -> TokenizedSentence:
    tokens = []
    n = len(sentence)
    i = 0
    while i < n:
        if sentence[i].isspace():
            i += 1
            continue
        j = i + 1
        while j < n and not sentence[j].isspace():
            j += 1
        tokens.append(Token(sentence[i:j], i, j))
        i = j
    return TokenizedSentence(sentence, tuple(tokens))


def enumerate_candidates(s: TokenizedSentence, max_tokens: int) -> list[AlignmentCandidate]:
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    n = len(s.tokens)
    return [AlignmentCandidate(i, j, s.span_text(i, j))
            for i in range(n) for j in range(i, min(n, i + max_tokens))]


def _pick(candidates: Sequence[AlignmentCandidate], scores: Sequence[float]) -> AlignmentCandidate:
    best_i = 0
    for i in range(1, len(candidates)):
        c, b = candidates[i], candidates[best_i]
        if scores[i] > scores[best_i] or (scores[i] == scores[best_i] and (
                c.length < b.length or (c.length == b.length and c.first_token < b.first_token))):
            best_i = i
    return replace(candidates[best_i], score=scores[best_i])


def best_candidate(candidates: Sequence[AlignmentCandidate], translated_answer: str,
                   sim: Similarity) -> AlignmentCandidate:
    if not candidates:
        raise ValueError("no candidates")
    scores = sim.score_matrix([c.text for c in candidates], translated_answer)
    return _pick(candidates, scores)


def score_candidates(s: TokenizedSentence, translated_answer: str, sim: Similarity,
                     max_tokens: int) -> tuple[list[AlignmentCandidate], list[float]]:
    """Enumerate and score; uses the incremental kernel when the metric offers it."""
    candidates = enumerate_candidates(s, max_tokens)
    fast = getattr(sim, "score_token_spans", None)
    if fast is not None:
        scores = fast([t.text for t in s.tokens], translated_answer, max_tokens)
    else:
        scores = sim.score_matrix([c.text for c in candidates], translated_answer)
    return candidates, list(scores)


def _accepts(score: float, reference: float, tolerance: float, mode: str) -> bool:
    if score <= 0.0:
        return False
    if mode == "relative":
        return score >= (1.0 - tolerance) * reference
    return score >= reference - tolerance


def extend_answer(base: AlignmentCandidate, s: TokenizedSentence, translated_answer: str,
                  sim: Similarity, tolerance: float = 0.01, tolerance_mode: str = "relative",
                  extend_reference: str = "running",
                  trace: list[dict[str, Any]] | None = None) -> AlignmentCandidate:
    if not 0 <= tolerance < 1:
        raise ValueError("tolerance must be in [0, 1)")
    n = len(s.tokens)
    if base.score is None:
        base = replace(base, score=sim.similarity(base.text, translated_answer))
    current = base
    best = base.score
    while True:
        options = []
        if current.first_token > 0:
            options.append((current.first_token - 1, current.last_token, "left"))
        if current.last_token < n - 1:
            options.append((current.first_token, current.last_token + 1, "right"))
        if not options:
            break
        texts = [s.span_text(f, l) for f, l, _ in options]
        scores = sim.score_matrix(texts, translated_answer)
        # right wins ties: appending is the default direction
        k = max(range(len(options)), key=lambda i: (scores[i], options[i][2] == "right"))
        f, l, side = options[k]
        reference = best if extend_reference == "running" else base.score
        ok = _accepts(scores[k], reference, tolerance, tolerance_mode)
        if trace is not None:
            for (ff, ll, sd), sc in zip(options, scores):
                trace.append({"event": "extend", "side": sd, "first_token": ff, "last_token": ll,
                              "score": sc, "reference": reference,
                              "accepted": ok and (ff, ll) == (f, l)})
        if not ok:
            break
        current = AlignmentCandidate(f, l, texts[k], scores[k])
        best = max(best, scores[k])
    return current


def align_answer(sentence: str, translated_answer: str, sim: Similarity,
                 config: AlignConfig | None = None,
                 trace: list[dict[str, Any]] | None = None) -> AlignmentResult:
    config = config or AlignConfig()
    if not sentence or not translated_answer:
        raise ValueError("sentence and translated answer must be non-empty")
    idx = sentence.find(translated_answer)
    if idx >= 0:
        if trace is not None:
            trace.append({"event": "exact", "char_start": idx,
                          "char_end": idx + len(translated_answer)})
        return AlignmentResult(translated_answer, idx, idx + len(translated_answer),
                               1.0, False, True)
    s = tokenize(sentence)
    if not s.tokens:
        raise NoAlignment(0.0, config.min_score)
    candidates, scores = score_candidates(s, translated_answer, sim, config.max_tokens)
    if trace is not None:
        for c, sc in zip(candidates, scores):
            trace.append({"event": "candidate", "first_token": c.first_token,
                          "last_token": c.last_token, "text": c.text, "score": sc})
    base = _pick(candidates, scores)
    if trace is not None:
        trace.append({"event": "base", "first_token": base.first_token,
                      "last_token": base.last_token, "text": base.text, "score": base.score})
    if base.score < config.min_score:
        raise NoAlignment(base.score, config.min_score)
    final = extend_answer(base, s, translated_answer, sim, config.tolerance,
                          config.tolerance_mode, config.extend_reference, trace)
    start = s.tokens[final.first_token].start
    end = s.tokens[final.last_token].end
    return AlignmentResult(sentence[start:end], start, end, final.score,
                           (final.first_token, final.last_token) != (base.first_token, base.last_token),
                           False)


def locate_in_context(translated_sentences: Sequence[str], sentence_index: int,
                      char_start: int, char_end: int) -> tuple[int, str]:
    """Offset of a sentence-relative span in the space-joined context."""
    if not 0 <= sentence_index < len(translated_sentences):
        raise IndexError(f"sentence index {sentence_index} out of range")
    if not 0 <= char_start <= char_end <= len(translated_sentences[sentence_index]):
        raise ValueError("char offsets outside the sentence")
    before = translated_sentences[:sentence_index]
    return sum(len(t) for t in before) + len(before) + char_start, " ".join(translated_sentences)
