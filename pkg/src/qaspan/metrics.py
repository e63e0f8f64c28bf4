"""Extractive-QA evaluation: EM and token F1 by answerability, unigram/bigram BLEU."""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .squad import SquadDataset

_ARTICLES = re.compile(r"\b(a|an|the)\b", re.UNICODE)


class EvaluationError(ValueError):
    pass


class MissingPrediction(EvaluationError):
    def __init__(self, qa_ids: Sequence[str]):
        self.qa_ids = list(qa_ids)
        super().__init__(f"no prediction for {len(self.qa_ids)} QA(s): {', '.join(self.qa_ids[:20])}")


class UnknownId(EvaluationError):
    def __init__(self, qa_ids: Sequence[str]):
        self.qa_ids = list(qa_ids)
        super().__init__(f"prediction(s) for unknown QA id(s): {', '.join(self.qa_ids[:20])}")


class EmptyCorpus(EvaluationError):
    pass


@dataclass(frozen=True)
class Prediction:
    qa_id: str
    answer_text: str


def normalize_answer(text: str, remove_articles: bool = False) -> str:
    text = text.casefold()
    text = "".join(ch for ch in text if not unicodedata.category(ch).startswith("P"))
    if remove_articles:
        text = _ARTICLES.sub(" ", text)
    return " ".join(text.split())


def _tokens(text: str, remove_articles: bool) -> list[str]:
    return normalize_answer(text, remove_articles).split()


def exact_match(pred: str, golds: Sequence[str], remove_articles: bool = False) -> int:
    p = normalize_answer(pred, remove_articles)
    if not golds:
        return int(p == "")
    return int(any(p == normalize_answer(g, remove_articles) for g in golds))


def _f1_tokens(pred: list[str], gold: list[str]) -> float:
    if not pred or not gold:
        return float(pred == gold)
    overlap = sum((Counter(pred) & Counter(gold)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(gold)
    return 2 * precision * recall / (precision + recall)


def f1(pred: str, golds: Sequence[str], remove_articles: bool = False) -> float:
    p = _tokens(pred, remove_articles)
    if not golds:
        return float(not p)
    return max(_f1_tokens(p, _tokens(g, remove_articles)) for g in golds)


def best_gold(pred: str, golds: Sequence[str], remove_articles: bool = False) -> str:
    """Gold with the highest F1 against ``pred``; first one wins ties."""
    p = _tokens(pred, remove_articles)
    scores = [_f1_tokens(p, _tokens(g, remove_articles)) for g in golds]
    return golds[max(range(len(golds)), key=lambda i: (scores[i], -i))]


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _clipped(pred: Sequence[str], ref: Sequence[str], n: int) -> tuple[int, int]:
    cp = _ngrams(pred, n)
    cr = _ngrams(ref, n)
    return sum(min(c, cr[g]) for g, c in cp.items()), sum(cp.values())


def _combine(matches: Sequence[int], totals: Sequence[int], pred_len: int, ref_len: int) -> float:
    if pred_len == 0:
        return 0.0
    log_p = 0.0
    for m, t in zip(matches, totals):
        if t == 0 or m == 0:
            return 0.0
        log_p += math.log(m / t)
    bp = math.exp(min(0.0, 1.0 - ref_len / pred_len))
    return 100.0 * bp * math.exp(log_p / len(matches))


def bleu(pairs: Iterable[tuple[str, str]], max_n: int = 2, mode: str = "corpus",
         remove_articles: bool = False) -> float:
    """BLEU in percent over (prediction, gold) pairs, uniform weights over orders 1..max_n.

    ``mode="corpus"`` pools clipped n-gram counts and lengths over all pairs
    before combining; ``mode="sentence"`` averages per-pair BLEU.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    toks = [(_tokens(p, remove_articles), _tokens(g, remove_articles)) for p, g in pairs]
    if not toks:
        raise EmptyCorpus("no (prediction, gold) pairs to score")
    if mode == "sentence":
        total = 0.0
        for p, g in toks:
            stats = [_clipped(p, g, n) for n in range(1, max_n + 1)]
            total += _combine([m for m, _ in stats], [t for _, t in stats], len(p), len(g))
        return total / len(toks)
    if mode != "corpus":
        raise ValueError(f"unknown BLEU mode {mode!r}")
    matches = [0] * max_n
    totals = [0] * max_n
    pred_len = ref_len = 0
    for p, g in toks:
        pred_len += len(p)
        ref_len += len(g)
        for n in range(1, max_n + 1):
            m, t = _clipped(p, g, n)
            matches[n - 1] += m
            totals[n - 1] += t
    return _combine(matches, totals, pred_len, ref_len)


@dataclass
class EvalReport:
    em: float
    f1: float
    em_has: float
    f1_has: float
    em_no: float
    f1_no: float
    bleu1: float
    bleu2: float
    n_total: int
    n_has: int
    n_no: int
    n_bleu: int
    per_qa: dict[str, tuple[int, float]] = field(default_factory=dict, repr=False)

    COLUMNS = ("em", "f1", "em_has", "f1_has", "em_no", "f1_no", "bleu1", "bleu2")

    def to_dict(self, rounded: bool = True) -> dict[str, float | int]:
        d: dict[str, float | int] = {}
        for k in self.COLUMNS:
            v = getattr(self, k)
            d[k] = round(v, 2) if rounded else v
        d.update(n_total=self.n_total, n_has=self.n_has, n_no=self.n_no, n_bleu=self.n_bleu)
        return d

    def table(self) -> str:
        heads = ["EM%", "F1%", "EM(Has_ans)", "F1(Has_ans)", "EM(No_ans)", "F1(No_ans)",
                 "BLEU%(Unigram)", "BLEU%(Bigram)"]
        vals = [f"{getattr(self, k):.2f}" for k in self.COLUMNS]
        widths = [max(len(h), len(v)) for h, v in zip(heads, vals)]
        line1 = "  ".join(h.rjust(w) for h, w in zip(heads, widths))
        line2 = "  ".join(v.rjust(w) for v, w in zip(vals, widths))
        counts = f"QAs: {self.n_total} (has answer {self.n_has}, no answer {self.n_no}); BLEU pairs: {self.n_bleu}"
        return f"{line1}\n{line2}\n{counts}"


def _mean(xs: Sequence[float]) -> float:
    return 100.0 * sum(xs) / len(xs) if xs else 0.0


def evaluate(preds: Iterable[Prediction] | Mapping[str, str], ds: SquadDataset,
             remove_articles: bool = False, bleu_mode: str = "corpus") -> EvalReport:
    if isinstance(preds, Mapping):
        pred_map = dict(preds)
    else:
        pred_map = {p.qa_id: p.answer_text for p in preds}
    golds: dict[str, list[str]] = {}
    for _, qa in ds.iter_qas():
        golds[qa.id] = [] if qa.is_impossible else [a.text for a in qa.answers]
    unknown = sorted(set(pred_map) - set(golds))
    if unknown:
        raise UnknownId(unknown)
    missing = sorted(set(golds) - set(pred_map))
    if missing:
        raise MissingPrediction(missing)

    per_qa: dict[str, tuple[int, float]] = {}
    has_em, has_f1, no_em, no_f1 = [], [], [], []
    pairs = []
    for qid in sorted(golds):
        g, p = golds[qid], pred_map[qid]
        em_v = exact_match(p, g, remove_articles)
        f1_v = f1(p, g, remove_articles)
        per_qa[qid] = (em_v, f1_v)
        if g:
            has_em.append(em_v)
            has_f1.append(f1_v)
            if normalize_answer(p, remove_articles):
                pairs.append((p, best_gold(p, g, remove_articles)))
        else:
            no_em.append(em_v)
            no_f1.append(f1_v)
    all_em = has_em + no_em
    all_f1 = has_f1 + no_f1
    b1 = b2 = 0.0
    if pairs:
        b1 = bleu(pairs, 1, bleu_mode, remove_articles)
        b2 = bleu(pairs, 2, bleu_mode, remove_articles)
    return EvalReport(
        em=_mean(all_em), f1=_mean(all_f1),
        em_has=_mean(has_em), f1_has=_mean(has_f1),
        em_no=_mean(no_em), f1_no=_mean(no_f1),
        bleu1=b1, bleu2=b2,
        n_total=len(all_em), n_has=len(has_em), n_no=len(no_em), n_bleu=len(pairs),
        per_qa=per_qa,
    )
