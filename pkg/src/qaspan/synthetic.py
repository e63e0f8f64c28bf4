"""Seeded generator of small multi-script SQuAD 2.0 corpora.

Answers are always whole tokens (trailing punctuation stripped), like
most real SQuAD answers. Some answers cross a sentence boundary, and about
a third of questions are unanswerable.
"""

from __future__ import annotations

import random

from .squad import QA, Answer, Article, Paragraph, SquadDataset

LATIN = ("river", "empire", "castle", "harbour", "council", "temple", "valley", "railway",
         "market", "poet", "treaty", "festival", "monsoon", "dynasty", "library", "bridge",
         "Pune", "Delhi", "Ganga", "Kaveri", "Ashoka", "Tagore", "Mumbai", "Chennai")
DEVANAGARI = ("नदी", "साम्राज्य", "किल्ला", "बंदर", "परिषद", "मंदिर", "दरी", "रेल्वे",
              "बाजार", "कवी", "करार", "उत्सव", "पाऊस", "राजवंश", "ग्रंथालय", "पूल")
TAMIL = ("ஆறு", "பேரரசு", "கோட்டை", "துறைமுகம்", "மன்றம்", "கோயில்", "பள்ளத்தாக்கு",
         "சந்தை", "கவிஞர்", "ஒப்பந்தம்", "திருவிழா", "நூலகம்", "பாலம்")
NUMBERS = ("1947", "1857", "320", "12", "2011", "3.14", "98,000")
TERMINATORS = (".", ".", ".", "!", "?", "।")

_SCRIPTS = (LATIN, DEVANAGARI, TAMIL)


def _sentence(rng: random.Random) -> list[str]:
    n = rng.randint(4, 14)
    words = []
    for _ in range(n):
        r = rng.random()
        if r < 0.1:
            words.append(rng.choice(NUMBERS))
        else:
            words.append(rng.choice(rng.choice(_SCRIPTS)))
        if rng.random() < 0.08 and len(words) < n:
            words[-1] += ","
    words[-1] += rng.choice(TERMINATORS)
    return words


def _strip_punct(word: str) -> str:
    return word.rstrip(",.!?।")


def generate_corpus(n_qas: int = 200, seed: int = 0, impossible_rate: float = 1 / 3,
                    cross_sentence_rate: float = 0.03, multi_answer_rate: float = 0.1,
                    qas_per_paragraph: tuple[int, int] = (1, 6),
                    paragraphs_per_article: tuple[int, int] = (1, 4)) -> SquadDataset:
    rng = random.Random(seed)
    articles = []
    made = 0
    a_idx = 0
    while made < n_qas:
        paragraphs = []
        for _ in range(rng.randint(*paragraphs_per_article)):
            if made >= n_qas:
                break
            sents = [_sentence(rng) for _ in range(rng.randint(1, 5))]
            # word -> char offset in the context
            offsets = []
            pos = 0
            flat = []
            for si, words in enumerate(sents):
                for wi, w in enumerate(words):
                    offsets.append(pos)
                    flat.append((si, wi, w))
                    pos += len(w) + 1
            context = " ".join(" ".join(w) for w in sents)
            qas = []
            for _ in range(rng.randint(*qas_per_paragraph)):
                if made >= n_qas:
                    break
                qid = f"q{made:06d}"
                question = " ".join(rng.choice(rng.choice(_SCRIPTS)) for _ in range(rng.randint(3, 8))) + "?"
                if rng.random() < impossible_rate:
                    plausible = None
                    if rng.random() < 0.5:
                        k = rng.randrange(len(flat))
                        text = _strip_punct(flat[k][2]) or flat[k][2]
                        plausible = (Answer(text, offsets[k]),)
                    qas.append(QA(qid, question, True, (), plausible))
                else:
                    n_ans = 2 if rng.random() < multi_answer_rate else 1
                    answers = []
                    for _ in range(n_ans):
                        answers.append(_pick_answer(rng, flat, offsets, context,
                                                    cross_sentence_rate))
                    qas.append(QA(qid, question, False, tuple(answers)))
                made += 1
            paragraphs.append(Paragraph(context, tuple(qas)))
        articles.append(Article(f"Article_{a_idx}", tuple(paragraphs)))
        a_idx += 1
    return SquadDataset("v2.0", tuple(articles))


def _pick_answer(rng, flat, offsets, context, cross_rate) -> Answer:
    n = len(flat)
    while True:
        k = rng.randrange(n)
        si = flat[k][0]
        if rng.random() < cross_rate and k + 1 < n and flat[k + 1][0] != si:
            last = k + 1
        else:
            last = k
            while (last + 1 < n and flat[last + 1][0] == si and rng.random() < 0.45
                   and last - k < 5):
                last += 1
        start = offsets[k]
        end = offsets[last] + len(flat[last][2])
        text = context[start:end]
        stripped = _strip_punct(text)
        if stripped:
            return Answer(stripped, start)
