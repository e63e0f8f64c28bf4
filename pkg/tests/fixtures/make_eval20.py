"""Regenerate eval20_expected.json with an implementation independent of qaspan.

EM/F1 follow the SQuAD v2 reference script, re-written here; BLEU comes from
sacrebleu on pre-normalized, space-tokenized text. Run by hand (needs
sacrebleu); tests only read the frozen JSON.

nltk's corpus_bleu is not used: it floors every per-segment n-gram
denominator at 1, which charges one-token predictions a phantom bigram.
"""

import json
import sys
import unicodedata
from collections import Counter
from pathlib import Path

from sacrebleu.metrics import BLEU

HERE = Path(__file__).parent


def norm(s):
    s = s.casefold()
    s = "".join(c for c in s if unicodedata.category(c)[0] != "P")
    return " ".join(s.split())


def f1(p, g):
    pt, gt = norm(p).split(), norm(g).split()
    if not pt or not gt:
        return float(pt == gt)
    common = sum((Counter(pt) & Counter(gt)).values())
    if not common:
        return 0.0
    pr, rc = common / len(pt), common / len(gt)
    return 2 * pr * rc / (pr + rc)


def main():
    ds = json.loads((HERE / "eval20_dataset.json").read_text(encoding="utf-8"))
    preds = json.loads((HERE / "eval20_predictions.json").read_text(encoding="utf-8"))
    rows = []
    for art in ds["data"]:
        for par in art["paragraphs"]:
            for qa in par["qas"]:
                golds = [a["text"] for a in qa["answers"]] if not qa["is_impossible"] else []
                rows.append((qa["id"], golds, preds[qa["id"]]))
    rows.sort()
    has_em, has_f1, no_em, no_f1, refs, hyps = [], [], [], [], [], []
    for _, golds, p in rows:
        if golds:
            ems = [float(norm(p) == norm(g)) for g in golds]
            f1s = [f1(p, g) for g in golds]
            has_em.append(max(ems))
            has_f1.append(max(f1s))
            if norm(p):
                best = max(range(len(golds)), key=lambda i: (f1s[i], -i))
                refs.append(norm(golds[best]))
                hyps.append(norm(p))
        else:
            v = float(norm(p) == "")
            no_em.append(v)
            no_f1.append(v)
    pct = lambda xs: 100 * sum(xs) / len(xs)
    b1 = BLEU(max_ngram_order=1, tokenize="none", smooth_method="none")
    b2 = BLEU(max_ngram_order=2, tokenize="none", smooth_method="none")
    out = {
        "em": pct(has_em + no_em), "f1": pct(has_f1 + no_f1),
        "em_has": pct(has_em), "f1_has": pct(has_f1),
        "em_no": pct(no_em), "f1_no": pct(no_f1),
        "bleu1": b1.corpus_score(hyps, [refs]).score,
        "bleu2": b2.corpus_score(hyps, [refs]).score,
        "sentence_bleu1": sum(b1.sentence_score(h, [r]).score for h, r in zip(hyps, refs)) / len(hyps),
        "n_total": len(rows), "n_has": len(has_em), "n_no": len(no_em), "n_bleu": len(hyps),
    }
    json.dump(out, sys.stdout, indent=2)
    print()


if __name__ == "__main__":
    main()
