# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled candidate scorer. Same contract as ``_kernels_py.score_spans``."""

from array import array
from libc.math cimport sqrt
from libc.stdlib cimport calloc, free, malloc


def score_spans(tok_start, tok_end, gram_ids, ans_counts, Py_ssize_t n_ids,
                long long ans_norm2, Py_ssize_t max_tokens):
    cdef long long[:] ts = array("q", tok_start)
    cdef long long[:] te = array("q", tok_end)
    cdef long long[:] gid = array("q", gram_ids) if len(gram_ids) else array("q", [0])
    cdef long long[:] ans = array("q", ans_counts) if len(ans_counts) else array("q", [0])
    cdef Py_ssize_t n = ts.shape[0]
    cdef Py_ssize_t i, j, p, last, next_pos, k, hi, n_touched
    cdef long long g, c, dot, norm2
    cdef double denom

    if n == 0:
        return []
    hi = n if max_tokens >= n else max_tokens
    out = array("d", bytes(8 * (n * hi)))
    cdef double[:] res = out
    cdef Py_ssize_t pos = 0

    cdef long long *counts = <long long *> calloc(n_ids if n_ids > 0 else 1, sizeof(long long))
    cdef long long *touched = <long long *> malloc((gid.shape[0] + 1) * sizeof(long long))
    if counts == NULL or touched == NULL:
        free(counts)
        free(touched)
        raise MemoryError()
    try:
        for i in range(n):
            n_touched = 0
            dot = 0
            norm2 = 0
            next_pos = ts[i]
            for j in range(i, min(n, i + max_tokens)):
                last = te[j] - 3
                p = next_pos
                while p <= last:
                    g = gid[p]
                    c = counts[g]
                    if c == 0:
                        touched[n_touched] = g
                        n_touched += 1
                    counts[g] = c + 1
                    norm2 += 2 * c + 1
                    dot += ans[g]
                    p += 1
                if p > next_pos:
                    next_pos = p
                if dot > 0:
                    denom = sqrt(<double> (norm2 * ans_norm2))
                    res[pos] = <double> dot / denom
                else:
                    res[pos] = 0.0
                pos += 1
            for k in range(n_touched):
                counts[touched[k]] = 0
    finally:
        free(counts)
        free(touched)
    return out[:pos].tolist()
