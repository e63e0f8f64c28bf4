"""Compare the compiled span scorer with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--sentences 300] [--tokens 30] [--repeat 3]

Both kernels get identical inputs; results are checked for exact equality
before timing.
"""

import argparse
import random
import sys
import time

from qaspan import kernels
from qaspan.backends import LexicalSimilarity
from qaspan.synthetic import DEVANAGARI, LATIN, TAMIL


def _inputs(n_sentences, n_tokens, seed):
    rng = random.Random(seed)
    vocab = LATIN + DEVANAGARI + TAMIL
    sim = LexicalSimilarity()
    cases = []
    for _ in range(n_sentences):
        tokens = [rng.choice(vocab) for _ in range(n_tokens)]
        i = rng.randrange(n_tokens)
        answer = " ".join(tokens[i:i + rng.randint(1, 4)]) + rng.choice(["", "s", " x"])
        cases.append((tokens, answer))
    # reuse the library's own packing so both kernels see the production layout
    packed = [sim._pack(tokens, answer) for tokens, answer in cases]
    return packed


def _time(fn, packed, max_tokens, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for args in packed:
            fn(*args, max_tokens)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=300)
    ap.add_argument("--tokens", type=int, default=30)
    ap.add_argument("--max-tokens", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if kernels.score_spans_compiled is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return 1
    packed = _inputs(args.sentences, args.tokens, args.seed)
    for p in packed:
        assert kernels.score_spans_py(*p, args.max_tokens) == kernels.score_spans_compiled(*p, args.max_tokens)
    n_cand = sum(sum(min(args.max_tokens, args.tokens - i) for i in range(args.tokens))
                 for _ in packed)
    t_py = _time(kernels.score_spans_py, packed, args.max_tokens, args.repeat)
    t_cy = _time(kernels.score_spans_compiled, packed, args.max_tokens, args.repeat)
    print(f"{len(packed)} sentences x {args.tokens} tokens, {n_cand:,} candidate spans")
    print(f"python  {t_py * 1e3:9.1f} ms  {n_cand / t_py / 1e6:7.2f} M spans/s")
    print(f"cython  {t_cy * 1e3:9.1f} ms  {n_cand / t_cy / 1e6:7.2f} M spans/s")
    print(f"speedup {t_py / t_cy:9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
