"""SQuAD 2.0 data model: parsing, canonical serialization, validation and stats.

All answer offsets are counted in Unicode code points of the enclosing
context, which is what Python ``str`` indexing gives. They are *not* byte
offsets; Indic scripts take three bytes per code point in UTF-8, so mixing the
two silently corrupts spans.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterator


class MalformedInput(ValueError):
    """Bad JSON or a missing/ill-typed required field."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}" if path else reason)


class EncodingError(ValueError):
    """Input bytes are not valid UTF-8."""


@dataclass(frozen=True)
class Answer:
    text: str
    answer_start: int

    @property
    def answer_end(self) -> int:
        return self.answer_start + len(self.text)


@dataclass(frozen=True)
class QA:
    id: str
    question: str
    is_impossible: bool
    answers: tuple[Answer, ...] = ()
    plausible_answers: tuple[Answer, ...] | None = None


@dataclass(frozen=True)
class Paragraph:
    context: str
    qas: tuple[QA, ...] = ()


@dataclass(frozen=True)
class Article:
    title: str
    paragraphs: tuple[Paragraph, ...] = ()


@dataclass(frozen=True)
class SquadDataset:
    version: str = "v2.0"
    articles: tuple[Article, ...] = ()

    def iter_qas(self) -> Iterator[tuple[Paragraph, QA]]:
        for article in self.articles:
            for paragraph in article.paragraphs:
                for qa in paragraph.qas:
                    yield paragraph, qa


@dataclass(frozen=True)
class DatasetStats:
    num_articles: int = 0
    num_paragraphs: int = 0
    num_qas: int = 0
    num_impossible: int = 0
    pct_impossible: float = 0.0

    def as_dict(self) -> dict[str, Any]:
        return {
            "num_articles": self.num_articles,
            "num_paragraphs": self.num_paragraphs,
            "num_qas": self.num_qas,
            "num_impossible": self.num_impossible,
            "pct_impossible": self.pct_impossible,
        }


@dataclass(frozen=True)
class Violation:
    kind: str
    qa_id: str | None
    reason: str
    path: str = field(default="")

    def __str__(self) -> str:
        qid = self.qa_id if self.qa_id is not None else "-"
        return f"{self.kind} [{qid}] {self.path}: {self.reason}"


# -- parsing -----------------------------------------------------------------

def _require(obj: Any, key: str, kind: type | tuple[type, ...], path: str) -> Any:
    if not isinstance(obj, dict):
        raise MalformedInput(path, "expected an object")
    if key not in obj:
        raise MalformedInput(f"{path}.{key}" if path else key, "missing required field")
    value = obj[key]
    # bool is an int subclass; never accept it where a number is wanted
    if kind is int and isinstance(value, bool):
        raise MalformedInput(f"{path}.{key}", "expected integer, got boolean")
    if not isinstance(value, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise MalformedInput(f"{path}.{key}" if path else key,
                             f"expected {name}, got {type(value).__name__}")
    return value


def _parse_answers(raw: Any, path: str) -> tuple[Answer, ...]:
    if not isinstance(raw, list):
        raise MalformedInput(path, "expected an array")
    out = []
    for i, a in enumerate(raw):
        apath = f"{path}[{i}]"
        out.append(Answer(
            text=_require(a, "text", str, apath),
            answer_start=_require(a, "answer_start", int, apath),
        ))
    return tuple(out)


def _parse_qa(raw: Any, path: str) -> QA:
    qid = _require(raw, "id", str, path)
    question = _require(raw, "question", str, path)
    answers = _parse_answers(_require(raw, "answers", list, path), f"{path}.answers")
    if "is_impossible" in raw:
        is_impossible = _require(raw, "is_impossible", bool, path)
    else:
        is_impossible = not answers
    plausible = None
    if raw.get("plausible_answers") is not None:
        plausible = _parse_answers(raw["plausible_answers"], f"{path}.plausible_answers")
    return QA(id=qid, question=question, is_impossible=is_impossible,
              answers=answers, plausible_answers=plausible)


def article_from_obj(art: Any, path: str = "article") -> Article:
    title = _require(art, "title", str, path)
    paragraphs = []
    for pi, par in enumerate(_require(art, "paragraphs", list, path)):
        ppath = f"{path}.paragraphs[{pi}]"
        context = _require(par, "context", str, ppath)
        qas = tuple(_parse_qa(q, f"{ppath}.qas[{qi}]")
                    for qi, q in enumerate(_require(par, "qas", list, ppath)))
        paragraphs.append(Paragraph(context=context, qas=qas))
    return Article(title=title, paragraphs=tuple(paragraphs))


def dataset_from_obj(obj: Any) -> SquadDataset:
    """Build a dataset from already-decoded JSON."""
    version = _require(obj, "version", str, "")
    data = _require(obj, "data", list, "")
    return SquadDataset(version=version,
                        articles=tuple(article_from_obj(a, f"data[{i}]") for i, a in enumerate(data)))


def parse_dataset(raw: bytes) -> SquadDataset:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"invalid UTF-8 at byte {exc.start}") from exc
    if text.startswith("\ufeff"):
        text = text[1:]
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return dataset_from_obj(obj)


# -- serialization -----------------------------------------------------------

def _answers_obj(answers: tuple[Answer, ...]) -> list[dict[str, Any]]:
    return [{"text": a.text, "answer_start": a.answer_start} for a in answers]


def qa_to_obj(qa: QA) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": qa.id,
        "question": qa.question,
        "answers": _answers_obj(qa.answers),
        "is_impossible": qa.is_impossible,
    }
    if qa.plausible_answers is not None:
        obj["plausible_answers"] = _answers_obj(qa.plausible_answers)
    return obj


def article_to_obj(article: Article) -> dict[str, Any]:
    return {
        "title": article.title,
        "paragraphs": [
            {"context": p.context, "qas": [qa_to_obj(q) for q in p.qas]}
            for p in article.paragraphs
        ],
    }


def dataset_to_obj(ds: SquadDataset) -> dict[str, Any]:
    return {"version": ds.version, "data": [article_to_obj(a) for a in ds.articles]}


def serialize_dataset(ds: SquadDataset, indent: int | None = None) -> bytes:
    """Canonical UTF-8 JSON. Key order is fixed so output is byte-stable."""
    separators = (",", ": ") if indent is not None else (",", ":")
    text = json.dumps(dataset_to_obj(ds), ensure_ascii=False, indent=indent,
                      separators=separators)
    return (text + "\n").encode("utf-8")


# -- validation --------------------------------------------------------------

def _check_answer(a: Answer, context: str, qa_id: str, path: str) -> Violation | None:
    if a.answer_start < 0 or a.answer_end > len(context):
        return Violation("OffsetOutOfRange", qa_id,
                         f"span [{a.answer_start}, {a.answer_end}) outside context of length {len(context)}",
                         path)
    found = context[a.answer_start:a.answer_end]
    if found != a.text:
        return Violation("TextMismatch", qa_id,
                         f"context has {found!r} at {a.answer_start}, answer is {a.text!r}", path)
    return None


def validate(ds: SquadDataset) -> list[Violation]:
    violations: list[Violation] = []
    seen: Counter[str] = Counter()
    for ai, article in enumerate(ds.articles):
        for pi, par in enumerate(article.paragraphs):
            ppath = f"data[{ai}].paragraphs[{pi}]"
            for qi, qa in enumerate(par.qas):
                qpath = f"{ppath}.qas[{qi}]"
                seen[qa.id] += 1
                if seen[qa.id] == 2:
                    violations.append(Violation("DuplicateId", qa.id, "id occurs more than once", qpath))
                if qa.is_impossible and qa.answers:
                    violations.append(Violation("ImpossibleWithAnswers", qa.id,
                                                f"is_impossible but {len(qa.answers)} answer(s)", qpath))
                elif not qa.is_impossible and not qa.answers:
                    violations.append(Violation("AnswerableWithoutAnswers", qa.id,
                                                "not is_impossible but no answers", qpath))
                if not qa.is_impossible and qa.answers and not par.context:
                    violations.append(Violation("EmptyContext", qa.id,
                                                "answerable question over empty context", ppath))
                for k, a in enumerate(qa.answers):
                    v = _check_answer(a, par.context, qa.id, f"{qpath}.answers[{k}]")
                    if v is not None:
                        violations.append(v)
    return violations


def stats(ds: SquadDataset) -> DatasetStats:
    n_par = sum(len(a.paragraphs) for a in ds.articles)
    n_qas = n_imp = 0
    for _, qa in ds.iter_qas():
        n_qas += 1
        n_imp += qa.is_impossible
    return DatasetStats(
        num_articles=len(ds.articles),
        num_paragraphs=n_par,
        num_qas=n_qas,
        num_impossible=n_imp,
        pct_impossible=n_imp / n_qas if n_qas else 0.0,
    )
