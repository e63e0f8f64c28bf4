"""Pure-Python candidate scorer; the reference the Cython build must match bit for bit."""

from math import sqrt


def score_spans(tok_start, tok_end, gram_ids, ans_counts, n_ids, ans_norm2, max_tokens):
    """Trigram cosine of every contiguous token span against the answer.

    ``tok_start``/``tok_end`` are token offsets in the whitespace-normalized
    sentence (tokens joined by single spaces). ``gram_ids[p]`` is the id of
    the trigram starting at position ``p`` of that string, ``ans_counts[g]``
    is the answer's count of gram ``g``. Scores come back flat, in
    (first token, span length) order.
    """
    n = len(tok_start)
    out = []
    if n == 0:
        return out
    counts = [0] * n_ids
    for i in range(n):
        touched = []
        dot = 0
        norm2 = 0
        next_pos = tok_start[i]
        for j in range(i, min(n, i + max_tokens)):
            last = tok_end[j] - 3
            p = next_pos
            while p <= last:
                g = gram_ids[p]
                c = counts[g]
                if c == 0:
                    touched.append(g)
                counts[g] = c + 1
                norm2 += 2 * c + 1
                dot += ans_counts[g]
                p += 1
            if p > next_pos:
                next_pos = p
            if dot > 0:
                out.append(dot / sqrt(norm2 * ans_norm2))
            else:
                out.append(0.0)
        for g in touched:
            counts[g] = 0
    return out
