import hashlib
import json
import random

import pytest

from qaspan.backends import (BackendUnavailable, Backends, ExactMatchSimilarity,
                             IdentityTranslator, LexicalSimilarity,
                             make_backends)
from qaspan.backends.base import Translator
from qaspan.pipeline import CheckpointError, PipelineConfig, translate_dataset
from qaspan.squad import QA, Answer, Article, Paragraph, SquadDataset, serialize_dataset, validate


def digest(ds):
    return hashlib.sha256(serialize_dataset(ds)).hexdigest()


def _english_cfg(**kw):
    from qaspan.languages import ENGLISH
    return PipelineConfig(target_lang=ENGLISH, **kw)


def test_identity_fixpoint(corpus):
    out, rep = translate_dataset(corpus, _english_cfg(), make_backends("identity", "exact"))
    assert rep.emitted_qas == rep.input_qas == 200
    assert validate(out) == []
    src = {qa.id: qa for _, qa in corpus.iter_qas()}
    for _, qa in out.iter_qas():
        assert [a.text for a in qa.answers] == [a.text for a in src[qa.id].answers]
        assert qa.is_impossible == src[qa.id].is_impossible


def test_identity_keeps_contexts_and_moves_only_repeated_spans(corpus):
    # contexts come back byte-identical; an answer start can only move to an
    # earlier verbatim occurrence inside the same sentence (first-occurrence rule)
    from qaspan.segmenter import Segmenter, find_answer_sentence
    out, _ = translate_dataset(corpus, _english_cfg(translate_plausible=True),
                               make_backends("identity", "exact"))
    seg = Segmenter()
    for a_src, a_out in zip(corpus.articles, out.articles):
        for p_src, p_out in zip(a_src.paragraphs, a_out.paragraphs):
            assert p_out.context == p_src.context
            sents = seg.split(p_src.context)
            for q_src, q_out in zip(p_src.qas, p_out.qas):
                for x, y in zip(q_src.answers, q_out.answers):
                    assert x.text == y.text
                    if x.answer_start != y.answer_start:
                        first, _ = find_answer_sentence(sents, x.answer_start, len(x.text))
                        assert sents[first].start <= y.answer_start < x.answer_start



@pytest.mark.parametrize("sim,floor", [("lexical", 0.99), ("exact", 1.0)])
def test_mock_recovers_spans(corpus, marathi, sim, floor):
    out, rep = translate_dataset(corpus, PipelineConfig(marathi), make_backends("mock", sim))
    assert validate(out) == []
    has = sum(1 for _, qa in corpus.iter_qas() if not qa.is_impossible)
    emitted_has = sum(1 for _, qa in out.iter_qas() if not qa.is_impossible)
    assert emitted_has / has >= floor
    # digits in translated text are in the target script
    for _, qa in out.iter_qas():
        for a in qa.answers:
            assert not any("0" <= ch <= "9" for ch in a.text)


def test_tiny_mock(tiny, marathi):
    out, rep = translate_dataset(tiny, PipelineConfig(marathi), make_backends("mock", "lexical"))
    p = out.articles[0].paragraphs[0]
    assert p.context == "§Pune §is §a §city. §It §lies §on §the §Mula §river. §The §fort §was §built §in §१६७०."
    a1, a2, a3 = p.qas
    assert a1.answers[0].text == "§a §city"
    assert a2.answers[0].text == "§Mula §river"
    assert a3.is_impossible and a3.answers == () and a3.plausible_answers is None
    assert out.articles[0].title == "Pune"
    assert validate(out) == []


def test_drop_impossible(tiny, marathi):
    out, rep = translate_dataset(tiny, PipelineConfig(marathi, drop_impossible=True),
                                 make_backends("mock", "lexical"))
    assert rep.dropped["Filtered"] == 1 and rep.emitted_qas == 2


def test_translate_plausible(tiny, marathi):
    out, _ = translate_dataset(tiny, PipelineConfig(marathi, translate_plausible=True),
                               make_backends("mock", "lexical"))
    qa = out.articles[0].paragraphs[0].qas[2]
    assert qa.plausible_answers[0].text == "§fort"
    assert validate(out) == []


def test_one_sentence_batch_and_one_qa_batch_per_paragraph(corpus, marathi):
    b = make_backends("mock", "lexical")
    translate_dataset(corpus, PipelineConfig(marathi), b)
    n_par = sum(len(a.paragraphs) for a in corpus.articles)
    assert b.translator.requests == 2 * n_par


def test_empty_dataset(marathi):
    out, rep = translate_dataset(SquadDataset("v2.0", ()), PipelineConfig(marathi),
                                 make_backends("mock", "lexical"))
    assert out.articles == () and rep.input_qas == 0


class Scripted(Translator):
    """Translator with per-text overrides; raises for texts mapped to an exception."""
    name = "scripted"

    def __init__(self, table):
        self.table = table

    def translate_batch(self, texts, src, tgt):
        out = []
        for t in texts:
            v = self.table.get(t, t)
            if isinstance(v, Exception):
                raise v
            out.append(v)
        return out


def test_drop_reasons(tiny, marathi):
    b = Backends(Scripted({"a city": "", "Mula river": "zzzz qqqq"}), LexicalSimilarity())
    out, rep = translate_dataset(tiny, PipelineConfig(marathi), b)
    assert rep.dropped["EmptyTranslation"] == 1
    assert rep.dropped["NoAlignment"] == 1
    assert rep.emitted_qas == 1
    assert rep.emitted_qas + rep.total_dropped == rep.input_qas


def test_backend_failure_drops_or_aborts(tiny, marathi):
    ctx_sentence = "Pune is a city."
    b = Backends(Scripted({ctx_sentence: BackendUnavailable("down")}), LexicalSimilarity())
    out, rep = translate_dataset(tiny, PipelineConfig(marathi), b)
    assert rep.dropped["BackendFailure"] == 3 and rep.emitted_qas == 0
    with pytest.raises(BackendUnavailable):
        translate_dataset(tiny, PipelineConfig(marathi, abort_on_backend_failure=True), b)


def test_answer_outside_context(marathi):
    ctx = "One sentence.   Two."
    ds = SquadDataset("v2.0", (Article("t", (Paragraph(ctx, (
        QA("x", "q?", False, (Answer("  ", 13),)),)),)),))
    _, rep = translate_dataset(ds, PipelineConfig(marathi), make_backends("mock", "lexical"))
    assert rep.dropped["AnswerOutsideContext"] == 1


def test_cross_sentence_answer(marathi):
    ctx = "The river ends. Here it starts."
    ans = Answer("ends. Here", ctx.index("ends"))
    ds = SquadDataset("v2.0", (Article("t", (Paragraph(ctx, (QA("x", "q?", False, (ans,)),)),)),))
    out, rep = translate_dataset(ds, PipelineConfig(marathi), make_backends("mock", "lexical"))
    assert rep.emitted_qas == 1
    a = out.articles[0].paragraphs[0].qas[0].answers[0]
    assert a.text == "§ends. §Here"
    assert validate(out) == []


@pytest.mark.parametrize("workers", [4, 16])
def test_workers_do_not_change_output(corpus, marathi, workers):
    ref, _ = translate_dataset(corpus, PipelineConfig(marathi), make_backends("mock", "lexical"))
    out, _ = translate_dataset(corpus, PipelineConfig(marathi, workers=workers),
                               make_backends("mock", "lexical"))
    assert digest(out) == digest(ref)


class Crash(Exception):
    pass


def _crash_at(k):
    def hook(done):
        if done == k:
            raise Crash(k)
    return hook


def test_resume_after_crash_is_byte_identical(corpus, marathi, tmp_path):
    cfg = PipelineConfig(marathi, workers=3)
    ref, ref_rep = translate_dataset(corpus, cfg, make_backends("mock", "lexical"))
    n = len(corpus.articles)
    for k in random.Random(0).sample(range(1, n), 5):
        prog = tmp_path / f"p{k}.jsonl"
        with pytest.raises(Crash):
            translate_dataset(corpus, cfg, make_backends("mock", "lexical"), prog,
                              on_checkpoint=_crash_at(k))
        out, rep = translate_dataset(corpus, cfg, make_backends("mock", "lexical"), prog)
        assert rep.resumed_articles == k
        assert digest(out) == digest(ref)
        assert rep.to_dict()["dropped"] == ref_rep.to_dict()["dropped"]


def test_resume_skips_translation(corpus, marathi, tmp_path):
    prog = tmp_path / "p.jsonl"
    translate_dataset(corpus, PipelineConfig(marathi), make_backends("mock", "lexical"), prog)
    b = make_backends("mock", "lexical")
    translate_dataset(corpus, PipelineConfig(marathi), b, prog)
    assert b.translator.requests == 0


def test_truncated_progress_record_is_redone(corpus, marathi, tmp_path):
    prog = tmp_path / "p.jsonl"
    cfg = PipelineConfig(marathi)
    ref, _ = translate_dataset(corpus, cfg, make_backends("mock", "lexical"))
    with pytest.raises(Crash):
        translate_dataset(corpus, cfg, make_backends("mock", "lexical"), prog,
                          on_checkpoint=_crash_at(4))
    raw = prog.read_bytes()
    lines = raw.split(b"\n")
    prog.write_bytes(b"\n".join(lines[:3]) + b"\n" + lines[3][:40])
    out, rep = translate_dataset(corpus, cfg, make_backends("mock", "lexical"), prog)
    assert rep.resumed_articles == 3
    assert digest(out) == digest(ref)


def test_progress_from_other_config_is_refused(corpus, marathi, tmp_path):
    prog = tmp_path / "p.jsonl"
    with pytest.raises(Crash):
        translate_dataset(corpus, PipelineConfig(marathi), make_backends("mock", "lexical"), prog,
                          on_checkpoint=_crash_at(1))
    with pytest.raises(CheckpointError):
        translate_dataset(corpus, PipelineConfig(marathi, tolerance=0.05),
                          make_backends("mock", "lexical"), prog)
    # worker count is not part of the fingerprint
    translate_dataset(corpus, PipelineConfig(marathi, workers=4), make_backends("mock", "lexical"), prog)


def test_checkpoint_every_batches_flushes(corpus, marathi, tmp_path):
    prog = tmp_path / "p.jsonl"
    seen = []
    translate_dataset(corpus, PipelineConfig(marathi, checkpoint_every=4),
                      make_backends("mock", "lexical"), prog, on_checkpoint=seen.append)
    n = len(corpus.articles)
    assert seen == list(range(4, n, 4)) + [n]
    assert len(prog.read_text(encoding="utf-8").splitlines()) == n
    assert all(json.loads(l)["article"] == i
               for i, l in enumerate(prog.read_text(encoding="utf-8").splitlines()))


def test_transliteration_of_leftover_latin(tiny, marathi):
    from qaspan.backends import IdentityTransliterator

    class Upper(IdentityTransliterator):
        name = "upper"

        def transliterate_batch(self, texts, tgt):
            return [t.upper() for t in texts]
    b = Backends(IdentityTranslator(), ExactMatchSimilarity(), Upper())
    out, rep = translate_dataset(tiny, PipelineConfig(marathi), b)
    p = out.articles[0].paragraphs[0]
    assert p.context == "PUNE IS A CITY. IT LIES ON THE MULA RIVER. THE FORT WAS BUILT IN १६७०."
    assert rep.emitted_qas == 3 and validate(out) == []
