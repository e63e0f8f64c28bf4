"""Translate a whole SQuAD 2.0 dataset and re-anchor every answer span.

Per paragraph: split the source context into sentences, translate them in
one batch, and rebuild the target context by joining the translations with
single spaces. Per answer: find the source sentence(s) holding it, translate
the answer on its own, align it inside the translated sentence(s) and turn
the sentence-relative offsets into context offsets. Digits are converted to
the target script everywhere, so offsets never shift.

Articles are the checkpoint unit. Each finished article is appended to a
progress file (JSON lines) together with its translated content; a rerun with
the same input and configuration skips what is already there and produces
byte-identical output.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import time
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Sequence

from .align import AlignConfig, NoAlignment, align_answer, locate_in_context
from .backends import Backends, BackendError, EmptyTranslation
from .languages import ENGLISH, LanguageSpec, convert_digits
from .segmenter import AnswerOutsideContext, Segmenter, SentenceSpan, find_answer_sentence
from .squad import (QA, Answer, Article, Paragraph, SquadDataset, article_from_obj,
                    article_to_obj, serialize_dataset)

log = logging.getLogger(__name__)

DROP_REASONS = ("NoAlignment", "EmptyTranslation", "BackendFailure", "AnswerOutsideContext",
                "Filtered")

_LATIN = re.compile(r"[A-Za-z]+(?:['’.\-][A-Za-z]+)*")


class CheckpointError(RuntimeError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    target_lang: LanguageSpec
    source_lang: LanguageSpec = ENGLISH
    min_score: float = 0.5
    tolerance: float = 0.01
    tolerance_mode: str = "relative"
    extend_reference: str = "running"
    max_tokens: int = 40
    workers: int = 1
    checkpoint_every: int = 1
    drop_impossible: bool = False
    translate_plausible: bool = False
    # raise instead of dropping QAs when a backend gives up
    abort_on_backend_failure: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        if not 0 <= self.min_score <= 1:
            raise ValueError("min_score must be in [0, 1]")

    @property
    def align(self) -> AlignConfig:
        return AlignConfig(max_tokens=self.max_tokens, tolerance=self.tolerance,
                           tolerance_mode=self.tolerance_mode,
                           extend_reference=self.extend_reference, min_score=self.min_score)

    def fingerprint_fields(self) -> dict[str, Any]:
        skip = ("workers", "checkpoint_every")
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in skip}
        d["source_lang"] = self.source_lang.code
        d["target_lang"] = self.target_lang.code
        return d


@dataclass
class PipelineReport:
    input_qas: int = 0
    emitted_qas: int = 0
    dropped: dict[str, int] = field(default_factory=lambda: dict.fromkeys(DROP_REASONS, 0))
    article_seconds: list[float] = field(default_factory=list)
    resumed_articles: int = 0

    def add(self, other: "ArticleOutcome") -> None:
        self.input_qas += other.input_qas
        self.emitted_qas += other.emitted_qas
        for k, v in other.dropped.items():
            self.dropped[k] = self.dropped.get(k, 0) + v
        self.article_seconds.append(other.seconds)

    @property
    def total_dropped(self) -> int:
        return sum(self.dropped.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_qas": self.input_qas,
            "emitted_qas": self.emitted_qas,
            "dropped": dict(self.dropped),
            "article_seconds": [round(s, 6) for s in self.article_seconds],
            "resumed_articles": self.resumed_articles,
        }

    def summary(self) -> str:
        lines = [f"input QAs     {self.input_qas}",
                 f"emitted QAs   {self.emitted_qas}"]
        for k in DROP_REASONS:
            lines.append(f"dropped {k:<22}{self.dropped.get(k, 0)}")
        lines.append(f"articles      {len(self.article_seconds)} "
                     f"({self.resumed_articles} resumed, {sum(self.article_seconds):.2f}s)")
        return "\n".join(lines)


@dataclass
class ArticleOutcome:
    article: Article
    input_qas: int
    emitted_qas: int
    dropped: dict[str, int]
    seconds: float


@dataclass
class Drop:
    reason: str
    detail: str = ""


@dataclass
class ParagraphState:
    source: Paragraph
    sentences: list[SentenceSpan]
    translated: list[str]
    context: str
    lookup: dict[str, str] = field(default_factory=dict)
    failure: str | None = None


# -- text helpers ---------------------------------------------------------------

def _localize(texts: Sequence[str], cfg: PipelineConfig, backends: Backends) -> list[str]:
    """Digit conversion plus transliteration of leftover Latin-script words."""
    out = [convert_digits(t, cfg.target_lang) for t in texts]
    tl = backends.transliterator
    if tl is None:
        return out
    words = sorted({m.group(0) for t in out for m in _LATIN.finditer(t)})
    if not words:
        return out
    rendered = dict(zip(words, tl.transliterate_batch(words, cfg.target_lang)))
    return [_LATIN.sub(lambda m: rendered[m.group(0)] or m.group(0), t) for t in out]


def _translate_many(texts: Sequence[str], cfg: PipelineConfig,
                    backends: Backends) -> dict[str, str]:
    unique = sorted({t for t in texts if t.strip()})
    if not unique:
        return {}
    raw = backends.translator.translate_batch(unique, cfg.source_lang, cfg.target_lang)
    return dict(zip(unique, _localize(raw, cfg, backends)))


# -- per-paragraph / per-QA -----------------------------------------------------

def translate_paragraph(p: Paragraph, cfg: PipelineConfig, backends: Backends,
                        segmenter: Segmenter | None = None) -> tuple[list[str], list[SentenceSpan]]:
    sentences = (segmenter or Segmenter()).split(p.context)
    if not sentences:
        return [], []
    raw = backends.translator.translate_batch([s.text for s in sentences],
                                              cfg.source_lang, cfg.target_lang)
    if len(raw) != len(sentences):
        raise BackendError(f"translator returned {len(raw)} sentences for {len(sentences)}")
    return _localize(raw, cfg, backends), sentences


def prepare_paragraph(p: Paragraph, cfg: PipelineConfig, backends: Backends,
                      segmenter: Segmenter | None = None) -> ParagraphState:
    """Translate the context, then every question and answer of the paragraph in one batch."""
    try:
        translated, sentences = translate_paragraph(p, cfg, backends, segmenter)
    except BackendError as exc:
        if cfg.abort_on_backend_failure:
            raise
        log.warning("paragraph translation failed: %s", exc)
        return ParagraphState(p, [], [], "", failure=str(exc))
    state = ParagraphState(p, sentences, translated, " ".join(translated))
    texts = []
    for qa in p.qas:
        texts.append(qa.question)
        texts.extend(a.text.strip() for a in qa.answers)
        if cfg.translate_plausible and qa.plausible_answers:
            texts.extend(a.text.strip() for a in qa.plausible_answers)
    try:
        state.lookup = _translate_many(texts, cfg, backends)
    except BackendError as exc:
        if cfg.abort_on_backend_failure:
            raise
        log.warning("question/answer batch failed, falling back to single calls: %s", exc)
    return state


def _translate_one(text: str, state: ParagraphState, cfg: PipelineConfig,
                   backends: Backends) -> str:
    if text in state.lookup:
        out = state.lookup[text]
    else:
        out = _localize([backends.translator.translate_batch([text], cfg.source_lang,
                                                             cfg.target_lang)[0]], cfg, backends)[0]
    if not out.strip():
        raise EmptyTranslation(f"empty translation for {text[:60]!r}")
    return out


def _project_answer(a: Answer, state: ParagraphState, cfg: PipelineConfig,
                    backends: Backends) -> Answer | Drop:
    try:
        first, last = find_answer_sentence(state.sentences, a.answer_start, len(a.text))
    except AnswerOutsideContext as exc:
        return Drop("AnswerOutsideContext", str(exc))
    merged = " ".join(state.translated[first:last + 1])
    if not merged.strip():
        return Drop("EmptyTranslation", "answer sentence translated to nothing")
    try:
        t_answer = _translate_one(a.text.strip(), state, cfg, backends)
    except EmptyTranslation as exc:
        return Drop("EmptyTranslation", str(exc))
    try:
        res = align_answer(merged, t_answer, backends.similarity, cfg.align)
    except NoAlignment as exc:
        return Drop("NoAlignment", str(exc))
    sentences = state.translated[:first] + [merged] + state.translated[last + 1:]
    start, _ = locate_in_context(sentences, first, res.char_start, res.char_end)
    return Answer(res.span_text, start)


def translate_qa(qa: QA, state: ParagraphState, cfg: PipelineConfig,
                 backends: Backends) -> QA | Drop:
    if state.failure is not None:
        return Drop("BackendFailure", state.failure)
    if qa.is_impossible and cfg.drop_impossible:
        return Drop("Filtered", "impossible question")
    try:
        question = _translate_one(qa.question, state, cfg, backends) if qa.question.strip() else qa.question
        if qa.is_impossible:
            plausible = None
            if cfg.translate_plausible and qa.plausible_answers:
                plausible = tuple(r for r in (_project_answer(a, state, cfg, backends)
                                              for a in qa.plausible_answers)
                                  if isinstance(r, Answer))
            return QA(qa.id, question, True, (), plausible)
        projected = [_project_answer(a, state, cfg, backends) for a in qa.answers]
    except EmptyTranslation as exc:
        return Drop("EmptyTranslation", str(exc))
    except BackendError as exc:
        if cfg.abort_on_backend_failure:
            raise
        return Drop("BackendFailure", str(exc))
    kept = tuple(r for r in projected if isinstance(r, Answer))
    if not kept:
        drops = [r for r in projected if isinstance(r, Drop)]
        return drops[0] if drops else Drop("AnswerOutsideContext", "no answers")
    return QA(qa.id, question, False, kept, None)


def _process_paragraph(p: Paragraph, cfg: PipelineConfig, backends: Backends,
                       segmenter: Segmenter | None) -> tuple[Paragraph, dict[str, int], float]:
    t0 = time.perf_counter()
    dropped: dict[str, int] = {}
    state = prepare_paragraph(p, cfg, backends, segmenter)
    out = []
    for qa in p.qas:
        r = translate_qa(qa, state, cfg, backends)
        if isinstance(r, Drop):
            dropped[r.reason] = dropped.get(r.reason, 0) + 1
            log.debug("dropped %s: %s %s", qa.id, r.reason, r.detail)
        else:
            out.append(r)
    return Paragraph(state.context, tuple(out)), dropped, time.perf_counter() - t0


# -- checkpointing ----------------------------------------------------------------

def run_fingerprint(ds: SquadDataset, cfg: PipelineConfig, backends: Backends,
                    extra: dict[str, Any] | None = None) -> str:
    h = hashlib.sha256(serialize_dataset(ds))
    desc = {
        "config": cfg.fingerprint_fields(),
        "translator": getattr(backends.translator, "name", type(backends.translator).__name__),
        "marker": getattr(backends.translator, "marker", None),
        "similarity": getattr(backends.similarity, "name", type(backends.similarity).__name__),
        "transliterator": None if backends.transliterator is None
        else getattr(backends.transliterator, "name", type(backends.transliterator).__name__),
        "extra": extra or {},
    }
    h.update(json.dumps(desc, sort_keys=True).encode())
    return h.hexdigest()


class ProgressLog:
    """JSON-lines progress file, one record per completed article."""

    def __init__(self, path: str | Path, fingerprint: str):
        self.path = Path(path)
        self.fingerprint = fingerprint

    def load(self) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        raw = self.path.read_bytes()
        records, good, pos = [], 0, 0
        while pos < len(raw):
            nl = raw.find(b"\n", pos)
            if nl < 0:
                break
            try:
                rec = json.loads(raw[pos:nl])
            except ValueError:
                break
            if rec.get("fingerprint") != self.fingerprint:
                raise CheckpointError(
                    f"{self.path} belongs to a different input or configuration; "
                    "delete it to start over")
            if rec.get("article") != len(records):
                break
            records.append(rec)
            pos = nl + 1
            good = pos
        if good < len(raw):
            log.warning("progress file %s: ignoring %d bytes of partial record",
                        self.path, len(raw) - good)
            with open(self.path, "r+b") as fh:
                fh.truncate(good)
        return records

    def append(self, records: Sequence[dict[str, Any]]) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                for rec in records:
                    fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise CheckpointError(f"cannot write progress file {self.path}: {exc}") from exc


def _record(index: int, fingerprint: str, outcome: ArticleOutcome) -> dict[str, Any]:
    return {
        "article": index,
        "fingerprint": fingerprint,
        "input_qas": outcome.input_qas,
        "emitted_qas": outcome.emitted_qas,
        "dropped": outcome.dropped,
        "seconds": outcome.seconds,
        "result": article_to_obj(outcome.article),
    }


def _outcome_from_record(rec: dict[str, Any]) -> ArticleOutcome:
    return ArticleOutcome(article_from_obj(rec["result"]), rec["input_qas"], rec["emitted_qas"],
                          dict(rec["dropped"]), rec["seconds"])


# -- dataset ------------------------------------------------------------------------

def translate_dataset(ds: SquadDataset, cfg: PipelineConfig, backends: Backends,
                      checkpoint_path: str | Path | None = None,
                      segmenter: Segmenter | None = None,
                      on_checkpoint: Callable[[int], None] | None = None,
                      ) -> tuple[SquadDataset, PipelineReport]:
    """Translate ``ds``; resumes from ``checkpoint_path`` when it holds matching progress.

    ``on_checkpoint`` is called with the number of completed articles after
    each progress flush.
    """
    report = PipelineReport()
    done: list[ArticleOutcome] = []
    progress = None
    if checkpoint_path is not None:
        progress = ProgressLog(checkpoint_path, run_fingerprint(ds, cfg, backends))
        done = [_outcome_from_record(r) for r in progress.load()]
        report.resumed_articles = len(done)
        if done:
            log.info("resuming after %d of %d articles", len(done), len(ds.articles))

    def run_article(article: Article, futures: list[Future]) -> ArticleOutcome:
        seconds = 0.0
        paragraphs, dropped = [], dict.fromkeys(DROP_REASONS, 0)
        for fut in futures:
            par, d, dt = fut.result()
            paragraphs.append(par)
            seconds += dt
            for k, v in d.items():
                dropped[k] = dropped.get(k, 0) + v
        n_in = sum(len(p.qas) for p in article.paragraphs)
        n_out = sum(len(p.qas) for p in paragraphs)
        return ArticleOutcome(Article(article.title, tuple(paragraphs)), n_in, n_out,
                              dropped, seconds)

    pending_records: list[dict[str, Any]] = []
    window = max(2, 2 * cfg.workers)
    executor = ThreadPoolExecutor(max_workers=cfg.workers, thread_name_prefix="qaspan")
    try:
        queue: deque[tuple[int, list[Future]]] = deque()
        next_idx = len(done)
        n_articles = len(ds.articles)
        while next_idx < n_articles or queue:
            while next_idx < n_articles and len(queue) < window:
                art = ds.articles[next_idx]
                queue.append((next_idx, [executor.submit(_process_paragraph, p, cfg, backends,
                                                         segmenter) for p in art.paragraphs]))
                next_idx += 1
            idx, futures = queue.popleft()
            outcome = run_article(ds.articles[idx], futures)
            done.append(outcome)
            if progress is not None:
                pending_records.append(_record(idx, progress.fingerprint, outcome))
                if len(pending_records) >= cfg.checkpoint_every or idx == n_articles - 1:
                    progress.append(pending_records)
                    pending_records = []
                    if on_checkpoint is not None:
                        on_checkpoint(len(done))
    finally:
        executor.shutdown(wait=True, cancel_futures=True)

    for outcome in done:
        report.add(outcome)
    out = SquadDataset(ds.version, tuple(o.article for o in done))
    assert report.emitted_qas + report.total_dropped == report.input_qas
    return out, report
