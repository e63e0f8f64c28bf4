import math

import pytest
from hypothesis import given, settings, strategies as st

from qaspan import kernels
from qaspan.align import enumerate_candidates, tokenize
from qaspan.backends import LexicalSimilarity

sim = LexicalSimilarity()
word = st.text(alphabet="abcनदी1,.", min_size=1, max_size=6)


def _direct(tokens, target, max_tokens):
    s = tokenize(" ".join(tokens))
    return [sim.similarity(c.text, target) for c in enumerate_candidates(s, max_tokens)]


@settings(max_examples=400, deadline=None)
@given(st.lists(word, max_size=12), st.text(alphabet="abcनदी1,. ", max_size=14),
       st.integers(1, 6))
def test_incremental_scores_match_direct_scoring(tokens, target, max_tokens):
    got = sim.score_token_spans(tokens, target, max_tokens)
    assert got == _direct(tokens, target, max_tokens)


def test_python_fallback_matches_compiled():
    if kernels.score_spans_compiled is None:
        pytest.skip("compiled kernels not built")
    import random
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(0, 30)
        text_len = n * 4
        gram_ids = [rng.randrange(20) for _ in range(max(text_len, 1))]
        starts = [4 * i for i in range(n)]
        ends = [4 * i + rng.randint(1, 3) for i in range(n)]
        ans = [rng.randint(0, 3) for _ in range(20)]
        norm2 = sum(c * c for c in ans) or 1
        mt = rng.randint(1, 10)
        from array import array
        args = (array("q", starts), array("q", ends), array("q", gram_ids), array("q", ans),
                20, norm2, mt)
        assert kernels.score_spans_py(*args) == kernels.score_spans_compiled(*args)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_short_target_path():
    # answers under three characters score as a single gram of themselves
    assert sim.score_token_spans(["x", "ab", "y"], "ab", 3) == _direct(["x", "ab", "y"], "ab", 3)
    assert sim.score_token_spans(["ab"], "ab", 1) == [1.0]


def test_known_values():
    scores = sim.score_token_spans(["abcd", "wxyz"], "abcd", 2)
    assert scores[0] == 1.0
    assert scores[2] == 0.0
    # "abcd wxyz" has 7 grams, two shared with "abcd": 2 / sqrt(7 * 2)
    assert scores[1] == pytest.approx(2 / math.sqrt(14), abs=1e-15)


def test_benchmark_smoke(capsys):
    if kernels.score_spans_compiled is None:
        pytest.skip("compiled kernels not built")
    import runpy
    from pathlib import Path
    bench = runpy.run_path(str(Path(__file__).parents[1] / "benchmarks" / "bench_kernels.py"))
    assert bench["main"](["--sentences", "5", "--tokens", "8", "--repeat", "1"]) == 0
    assert "speedup" in capsys.readouterr().out
