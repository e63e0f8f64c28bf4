"""Rule-based sentence splitting with exact character offsets.

A sentence ends at a terminator (``. ! ? । ॥ …``), optionally followed by
closing quotes or brackets, when the next character is whitespace or the end
of the text. A period never ends a sentence when the word before it is a
known abbreviation. ``3.14`` is never split because no whitespace follows the
period.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

TERMINATORS = frozenset(".!?।॥…")
CLOSERS = frozenset("\"')]}’”»")

DEFAULT_ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e",
    "u.s", "u.k", "no", "inc", "ltd", "co", "corp", "mt", "ft", "gen", "gov",
    "sen", "rep", "rev", "capt", "col", "lt", "sgt", "jan", "feb", "mar", "apr",
    "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec", "approx", "fig",
    "vol", "ca",
})


class AnswerOutsideContext(ValueError):
    """Answer offsets touch no sentence (whitespace only or out of range)."""


@dataclass(frozen=True)
class SentenceSpan:
    text: str
    start: int
    end: int


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """One abbreviation per line, trailing period optional; ``#`` starts a comment."""
    out = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.add(line.rstrip(".").casefold())
    return frozenset(out)


def _word_before(context: str, dot: int) -> str:
    i = dot
    while i > 0 and not context[i - 1].isspace():
        i -= 1
    # strip opening punctuation such as "(Mr"
    return context[i:dot].lstrip("\"'([{‘“").casefold()


class Segmenter:
    def __init__(self, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
                 split_initials: bool = False):
        self.abbreviations = frozenset(a.rstrip(".").casefold() for a in abbreviations)
        self.split_initials = split_initials

    def _is_abbreviation(self, context: str, dot: int) -> bool:
        word = _word_before(context, dot)
        if not word:
            return False
        if word in self.abbreviations:
            return True
        # single-letter initial such as the "J" in "J. Smith"
        return (not self.split_initials and len(word) == 1 and word.isalpha()
                and context[dot - 1].isupper())

    def split(self, context: str) -> list[SentenceSpan]:
        n = len(context)
        spans = []
        start = 0
        i = 0
        while i < n:
            ch = context[i]
            if ch in TERMINATORS:
                j = i + 1
                while j < n and (context[j] in TERMINATORS or context[j] in CLOSERS):
                    j += 1
                if (j == n or context[j].isspace()) and not (
                        ch == "." and j == i + 1 and self._is_abbreviation(context, i)):
                    self._emit(context, start, j, spans)
                    start = j
                i = j
            else:
                i += 1
        self._emit(context, start, n, spans)
        return spans

    @staticmethod
    def _emit(context: str, start: int, end: int, spans: list[SentenceSpan]) -> None:
        while start < end and context[start].isspace():
            start += 1
        while end > start and context[end - 1].isspace():
            end -= 1
        if start < end:
            spans.append(SentenceSpan(context[start:end], start, end))


# Any object with a ``split(context) -> list[SentenceSpan]`` method can stand in
# for Segmenter in the pipeline, e.g. a wrapper around an external tokenizer.
_DEFAULT = Segmenter()


def split_sentences(context: str, segmenter: Segmenter | None = None) -> list[SentenceSpan]:
    return (segmenter or _DEFAULT).split(context)


def find_answer_sentence(sentences: Sequence[SentenceSpan], answer_start: int,
                         answer_len: int) -> tuple[int, int]:
    """Inclusive range of sentence indices whose union covers the answer."""
    answer_end = answer_start + answer_len
    first = last = None
    for idx, s in enumerate(sentences):
        if answer_len == 0:
            touches = s.start <= answer_start < s.end
        else:
            touches = s.start < answer_end and answer_start < s.end
        if touches:
            if first is None:
                first = idx
            last = idx
        elif first is not None:
            break
    if first is None:
        raise AnswerOutsideContext(
            f"answer [{answer_start}, {answer_end}) does not touch any sentence")
    return first, last
