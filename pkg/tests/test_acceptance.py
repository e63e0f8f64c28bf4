"""Acceptance suite: one PASS/FAIL/SKIP line per criterion, printed even under capture.

Run alone with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
lines inline). Tolerances are pinned below.
"""

import glob
import hashlib
import math
import os
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

from qaspan.align import _pick, best_candidate, enumerate_candidates, extend_answer, tokenize, AlignmentCandidate
from qaspan.backends import LexicalSimilarity, make_backends
from qaspan.languages import ENGLISH, default_registry
from qaspan.metrics import evaluate
from qaspan.pipeline import PipelineConfig, translate_dataset
from qaspan.squad import parse_dataset, serialize_dataset, stats, validate
from qaspan.synthetic import generate_corpus

pytestmark = pytest.mark.acceptance

RUNTIME_LIMIT_S = 10.0        # criterion 1
MOCK_LEXICAL_FLOOR = 0.99     # criterion 2
MOCK_EXACT_FLOOR = 1.0        # criterion 2
ORACLE_INSTANCES = 1000       # criterion 3
ORACLE_MAX_TOKENS = 12        # criterion 3
EXTEND_TOLERANCE = 0.01       # criterion 4
METRIC_TOL_PP = 0.01          # criterion 5
RANDOM_EVALS = 200            # criterion 5
SPLIT_COUNTS = {"train": 118_516, "validation": 11_873, "test": 11_803}  # criterion 6
KILL_POINTS = 5               # criterion 7
WORKER_COUNTS = (1, 4, 16)    # criterion 8

FIX = Path(__file__).parent / "fixtures"
MARATHI = default_registry().get("mr")


@pytest.fixture
def report(capsys):
    def emit(num, title, ok, detail=""):
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
        with capsys.disabled():
            print(f"\n[criterion {num}] {status}: {title}" + (f" ({detail})" if detail else ""))
    return emit


def _digest(ds):
    return hashlib.sha256(serialize_dataset(ds)).hexdigest()


# 1 ----------------------------------------------------------------------------

def test_c1_identity_round_trip(report):
    corpus = generate_corpus(200, seed=1)
    t0 = time.perf_counter()
    out, rep = translate_dataset(corpus, PipelineConfig(ENGLISH), make_backends("identity", "exact", "identity"))
    violations = validate(out)
    elapsed = time.perf_counter() - t0
    src = {q.id: q for _, q in corpus.iter_qas()}
    texts_equal = all([a.text for a in q.answers] == [a.text for a in src[q.id].answers]
                      for _, q in out.iter_qas())
    ok = (rep.emitted_qas == rep.input_qas == 200 and texts_equal and not violations
          and elapsed < RUNTIME_LIMIT_S)
    report(1, "identity round trip", ok,
           f"emitted {rep.emitted_qas}/200, violations {len(violations)}, {elapsed:.2f}s < {RUNTIME_LIMIT_S}s")
    assert ok


# 2 ----------------------------------------------------------------------------

def test_c2_mock_span_recovery(report):
    corpus = generate_corpus(200, seed=2)
    has = {q.id for _, q in corpus.iter_qas() if not q.is_impossible}
    rates = {}
    for sim in ("lexical", "exact"):
        out, _ = translate_dataset(corpus, PipelineConfig(MARATHI), make_backends("mock", sim))
        assert validate(out) == []
        emitted = {q.id for _, q in out.iter_qas() if not q.is_impossible}
        rates[sim] = len(emitted & has) / len(has)
    ok = rates["lexical"] >= MOCK_LEXICAL_FLOOR and rates["exact"] >= MOCK_EXACT_FLOOR
    report(2, "mock-translator span recovery", ok,
           f"lexical {100 * rates['lexical']:.2f}% >= {100 * MOCK_LEXICAL_FLOOR:.0f}%, "
           f"exact {100 * rates['exact']:.2f}% >= {100 * MOCK_EXACT_FLOOR:.0f}%")
    assert ok


# 3 ----------------------------------------------------------------------------

def _oracle_cos(a, b):
    def grams(s):
        s = " ".join(s.split())
        if 0 < len(s) < 3:
            return {s: 1}
        d = {}
        for i in range(len(s) - 2):
            d[s[i:i + 3]] = d.get(s[i:i + 3], 0) + 1
        return d
    ga, gb = grams(a), grams(b)
    if not ga or not gb:
        return float(not ga and not gb)
    dot = sum(c * gb.get(g, 0) for g, c in ga.items())
    if dot == 0:
        return 0.0
    return dot / math.sqrt(sum(c * c for c in ga.values()) * sum(c * c for c in gb.values()))


def _oracle_best(tokens, answer):
    best = None
    n = len(tokens)
    for i in range(n):
        for j in range(i, n):
            key = (-_oracle_cos(" ".join(tokens[i:j + 1]), answer), j - i, i)
            if best is None or key < best:
                best = key
    return best[2], best[2] + best[1]


def test_c3_oracle_equivalence(report):
    rng = random.Random(2024)
    vocab = ["ab", "abc", "bca", "cab", "a", "नदी", "दीन", "नद", "1947", "47", "x."]
    sim = LexicalSimilarity()
    mismatches = 0
    for _ in range(ORACLE_INSTANCES):
        tokens = [rng.choice(vocab) for _ in range(rng.randint(1, ORACLE_MAX_TOKENS))]
        answer = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 3)))
        s = tokenize(" ".join(tokens))
        cands = enumerate_candidates(s, ORACLE_MAX_TOKENS)
        want = _oracle_best(tokens, answer)
        got = best_candidate(cands, answer, sim)
        fast = _pick(cands, sim.score_token_spans(tokens, answer, ORACLE_MAX_TOKENS))
        if (got.first_token, got.last_token) != want or (fast.first_token, fast.last_token) != want:
            mismatches += 1
    report(3, "best_candidate vs exhaustive oracle", mismatches == 0,
           f"{mismatches} mismatches over {ORACLE_INSTANCES} instances")
    assert mismatches == 0


# 4 ----------------------------------------------------------------------------

# (sentence, answer, base span, accepted steps, rejected final step, final span);
# scores are hand-computed trigram cosines
EXTENSION_FIXTURES = [
    # answer norm2 11; 3/sqrt(22) -> 6/sqrt(88) (tie, accepted) -> 7/11 (0.51% below, accepted);
    # then the whole sentence, dot 10 and norm2 23: 10/sqrt(253) = 0.6287, 1.7% below: rejected
    ("abc bc bca abca", "abc abca ca", (3, 3), [(2, 3, 6 / math.sqrt(88)), (1, 3, 7 / 11)],
     (0, 3, 10 / math.sqrt(253)), (1, 3)),
    # answer norm2 21; 12/sqrt(168) = 0.9258 -> 14/sqrt(252) = 0.8819, 4.7% below: rejected
    ("abca bca a abca", "bca bca bca", (0, 1), [], (0, 2, 14 / math.sqrt(252)), (0, 1)),
]


def test_c4_extension_rule(report):
    sim = LexicalSimilarity()
    problems = []
    for sentence, answer, (bf, bl), steps, rejected, final in EXTENSION_FIXTURES:
        s = tokenize(sentence)
        base = AlignmentCandidate(bf, bl, s.span_text(bf, bl))
        trace = []
        out = extend_answer(base, s, answer, sim, EXTEND_TOLERANCE, trace=trace)
        running = sim.similarity(base.text, answer)
        accepted = []
        # every round here offers a single option (the span touches a sentence edge),
        # so each trace event must be accepted exactly when it clears the band
        for ev in trace:
            should = ev["score"] > 0 and ev["score"] >= (1 - EXTEND_TOLERANCE) * running
            if ev["accepted"] != should:
                problems.append((sentence, ev))
            if ev["accepted"]:
                accepted.append((ev["first_token"], ev["last_token"], ev["score"]))
                running = max(running, ev["score"])
        if [(f, l) for f, l, _ in accepted] != [(f, l) for f, l, _ in steps]:
            problems.append((sentence, "accepted steps", accepted))
        for (_, _, got), (_, _, want) in zip(accepted, steps):
            if abs(got - want) > 1e-12:
                problems.append((sentence, "score", got, want))
        last = max((e for e in trace if not e["accepted"]), key=lambda e: e["score"])
        if ((last["first_token"], last["last_token"]) != rejected[:2]
                or abs(last["score"] - rejected[2]) > 1e-12):
            problems.append((sentence, "rejected step", last))
        if (out.first_token, out.last_token) != final:
            problems.append((sentence, "final", out))
        if out.first_token > bf or out.last_token < bl:
            problems.append((sentence, "shrunk"))
    # never shrinks, on random inputs
    rng = random.Random(4)
    vocab = ["ab", "abc", "bca", "cab", "a", "नदी", "दीन"]
    for _ in range(500):
        s = tokenize(" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 8))))
        i = rng.randrange(len(s.tokens))
        j = rng.randrange(i, len(s.tokens))
        out = extend_answer(AlignmentCandidate(i, j, s.span_text(i, j)), s,
                            " ".join(rng.choice(vocab) for _ in range(2)), sim, EXTEND_TOLERANCE)
        if out.first_token > i or out.last_token < j:
            problems.append(("random", i, j, out))
    report(4, "extension rule", not problems,
           f"{len(EXTENSION_FIXTURES)} hand-scored fixtures, 500 random no-shrink checks, "
           f"{len(problems)} problems")
    assert not problems, problems[:3]


# 5 ----------------------------------------------------------------------------

def _random_predictions(ds, rng):
    out = {}
    for p, q in ds.iter_qas():
        toks = tokenize(p.context).tokens
        r = rng.random()
        if q.is_impossible:
            out[q.id] = "" if r < 0.6 else rng.choice(toks).text
        elif r < 0.4:
            out[q.id] = rng.choice(q.answers).text
        elif r < 0.55:
            out[q.id] = ""
        else:
            i = rng.randrange(len(toks))
            j = min(len(toks), i + rng.randint(1, 4))
            out[q.id] = p.context[toks[i].start:toks[j - 1].end]
    return out


def test_c5_metrics(report):
    import json
    ds = parse_dataset((FIX / "eval20_dataset.json").read_bytes())
    preds = json.loads((FIX / "eval20_predictions.json").read_text(encoding="utf-8"))
    expected = json.loads((FIX / "eval20_expected.json").read_text(encoding="utf-8"))
    rep = evaluate(preds, ds)
    fixture_ok = all(abs(getattr(rep, k) - expected[k]) <= METRIC_TOL_PP
                     for k in ("em", "f1", "em_has", "f1_has", "em_no", "f1_no", "bleu1", "bleu2"))
    split_bad, bleu_bad = 0, []
    for seed in range(RANDOM_EVALS):
        rng = random.Random(seed)
        corpus = generate_corpus(rng.randint(5, 60), seed=seed)
        r = evaluate(_random_predictions(corpus, rng), corpus)
        if r.em_no != r.f1_no or r.f1_has < r.em_has:
            split_bad += 1
        if r.bleu2 > r.bleu1:
            bleu_bad.append((seed, round(r.bleu1, 2), round(r.bleu2, 2)))
    report("5a", "20-QA fixture within 0.01 pp", fixture_ok)
    report("5b", "em_no = f1_no and f1 >= em (has-answer) on every random evaluation",
           split_bad == 0, f"{split_bad}/{RANDOM_EVALS} violations")
    report("5c", "BLEU1 >= BLEU2 on every random evaluation", not bleu_bad,
           f"{len(bleu_bad)}/{RANDOM_EVALS} violations, e.g. seed/BLEU1/BLEU2 {bleu_bad[:3]}")
    assert fixture_ok and split_bad == 0
    # Corpus BLEU does not guarantee BLEU1 >= BLEU2: one-token predictions add
    # unigrams but no bigrams to the pooled counts. This part is expected to fail.
    assert not bleu_bad, f"BLEU2 > BLEU1 in {len(bleu_bad)} evaluations: {bleu_bad[:5]}"


# 6 ----------------------------------------------------------------------------

def _split_files():
    root = os.environ.get("QASPAN_SPLITS_DIR")
    if not root or not Path(root).is_dir():
        return None
    found = {}
    for name, pats in (("train", ("*train*.json",)), ("validation", ("*dev*.json", "*val*.json")),
                       ("test", ("*test*.json",))):
        hits = sorted(h for pat in pats for h in glob.glob(str(Path(root) / pat)))
        if hits:
            found[name] = hits[0]
    return found if len(found) == 3 else None


def test_c6_split_statistics(report):
    files = _split_files()
    if files is None:
        report(6, "released split statistics", None,
               "set QASPAN_SPLITS_DIR to a directory with train/dev/test JSON files")
        pytest.skip("split files absent")
    counts = {k: stats(parse_dataset(Path(v).read_bytes())).num_qas for k, v in files.items()}
    ok = counts == SPLIT_COUNTS
    report(6, "released split statistics", ok, f"{counts} vs {SPLIT_COUNTS}")
    assert ok


# 7 ----------------------------------------------------------------------------

_KILLER = """
import os, sys
import qaspan.cli as cli
real = cli.translate_dataset
k = int(sys.argv[1])
def killing(*a, **kw):
    def hook(done):
        if done == k:
            os._exit(137)
    kw["on_checkpoint"] = hook
    return real(*a, **kw)
cli.translate_dataset = killing
cli.main(sys.argv[2:])
"""


def _cli(args, **kw):
    return subprocess.run([sys.executable, "-m", "qaspan.cli", *args], capture_output=True, **kw)


def test_c7_crash_resume(report, tmp_path):
    corpus = generate_corpus(200, seed=3)
    src = tmp_path / "in.json"
    src.write_bytes(serialize_dataset(corpus))
    common = ["--target", "mr", "--backend", "mock", "--workers", "2"]
    ref = tmp_path / "ref.json"
    assert _cli(["translate", str(src), str(ref), *common]).returncode == 0
    ref_hash = hashlib.sha256(ref.read_bytes()).hexdigest()
    n = len(corpus.articles)
    kills = sorted(random.Random(7).sample(range(1, n), KILL_POINTS))
    same = 0
    for k in kills:
        out = tmp_path / f"out{k}.json"
        killed = subprocess.run([sys.executable, "-c", _KILLER, str(k), "translate", str(src),
                                 str(out), *common], capture_output=True)
        assert killed.returncode == 137 and not out.exists()
        assert _cli(["translate", str(src), str(out), *common]).returncode == 0
        same += hashlib.sha256(out.read_bytes()).hexdigest() == ref_hash
    ok = same == len(kills)
    report(7, "crash resume byte-identical", ok,
           f"{same}/{len(kills)} kill points {kills} of {n} articles match")
    assert ok


# 8 ----------------------------------------------------------------------------

def test_c8_parallel_determinism(report):
    corpus = generate_corpus(200, seed=8)
    hashes = {}
    for w in WORKER_COUNTS:
        out, _ = translate_dataset(corpus, PipelineConfig(MARATHI, workers=w),
                                   make_backends("mock", "lexical"))
        hashes[w] = _digest(out)
    ok = len(set(hashes.values())) == 1
    report(8, "determinism under parallelism", ok,
           ", ".join(f"workers={w}: {h[:12]}" for w, h in hashes.items()))
    assert ok
