"""Independent brute-force reference implementations for tests.

Nothing here imports the package's metric or extraction code paths; the
point is that agreement between these and the library is evidence, not
tautology. Keep these naive and obvious.
"""

from __future__ import annotations

import math

import mpmath


def oracle_ngram_counts(tokens, n):
    counts = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def oracle_rouge_n(candidate, reference, n):
    cand = oracle_ngram_counts(candidate, n)
    ref = oracle_ngram_counts(reference, n)
    overlap = 0
    for gram in cand:
        if gram in ref:
            overlap += cand[gram] if cand[gram] < ref[gram] else ref[gram]
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    p = overlap / cand_total if cand_total > 0 else 0.0
    r = overlap / ref_total if ref_total > 0 else 0.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def oracle_lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def oracle_rouge_l(candidate, reference):
    lcs = oracle_lcs(candidate, reference)
    p = lcs / len(candidate) if candidate else 0.0
    r = lcs / len(reference) if reference else 0.0
    f1 = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f1


def oracle_extract(sentences, variant="f1"):
    """sentences: list of token lists. Returns (index, score) by explicit
    concatenation of the complement and linear scan."""
    if len(sentences) == 1:
        return 0, 0.0
    best_index = None
    best_score = None
    for i in range(len(sentences)):
        rest = []
        for j in range(len(sentences)):
            if j != i:
                rest = rest + list(sentences[j])
        p, r, f1 = oracle_rouge_n(sentences[i], rest, 1)
        score = f1 if variant == "f1" else r
        if best_score is None or score > best_score:
            best_score = score
            best_index = i
    return best_index, best_score


def oracle_mean_std(values, dps=60):
    """Arbitrary-precision sample mean and standard deviation (n-1)."""
    with mpmath.workdps(dps):
        n = len(values)
        mean = mpmath.fsum(values) / n
        var = mpmath.fsum((mpmath.mpf(v) - mean) ** 2 for v in values) / (n - 1)
        return float(mean), float(mpmath.sqrt(var))


def oracle_entropy_bits(probs):
    h = 0.0
    for p in probs:
        if p > 0:
            h -= p * math.log(p, 2)
    return h
