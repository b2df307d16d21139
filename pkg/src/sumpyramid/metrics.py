"""ROUGE-1/2/L with exact clipped-overlap counting.

Scores drive both pseudo-label selection and evaluation, so they are
computed from first principles here and cross-checked against an
independent brute-force oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .exceptions import InvalidN
from .text import DEFAULT_TOKENIZER, ngrams
from .validation import check_tokens

# LCS is quadratic; sequences longer than this are cut before the DP.
LCS_TOKEN_CAP = 4096

_STOPWORDS = frozenset(
    """a an the and or but if then else of at by for with about into onto to
    from in on is are was were be been being it its this that these those as
    not no nor so too very can will just than when while where which who whom
    what how all any both each few more most other some such own same s t don
    now""".split()
)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _light_stem(token: str) -> str:
    if len(token) > 4 and token.endswith("ies"):
        return token[:-3] + "y"
    if len(token) > 4 and token.endswith("sses"):
        return token[:-2]
    if len(token) > 3 and token.endswith("s") and not token.endswith(("ss", "us", "is")):
        token = token[:-1]
    if len(token) > 5 and token.endswith("ing"):
        return token[:-3]
    if len(token) > 4 and token.endswith("ed"):
        return token[:-2]
    if len(token) > 4 and token.endswith("ly"):
        return token[:-2]
    return token


def preprocess_tokens(
    tokens: Sequence[str], stem: bool = False, remove_stopwords: bool = False
) -> list[str]:
    out = check_tokens(tokens)
    if remove_stopwords:
        out = [t for t in out if t not in _STOPWORDS]
    if stem:
        out = [_light_stem(t) for t in out]
    return out


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidN(f"n must be a positive integer, got {n!r}")
    cand = ngrams(candidate, n)
    ref = ngrams(reference, n)
    overlap = sum(min(count, ref[gram]) for gram, count in cand.items())
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    a = a[:LCS_TOKEN_CAP]
    b = b[:LCS_TOKEN_CAP]
    if len(b) > len(a):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    cand = check_tokens(candidate, "candidate")
    ref = check_tokens(reference, "reference")
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref) if ref else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def rouge_1(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    return rouge_n(candidate, reference, 1)


def rouge_suite(
    candidate: str,
    reference: str,
    tokenizer=None,
    stem: bool = False,
    remove_stopwords: bool = False,
) -> dict[str, RougeScore]:
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    cand = preprocess_tokens(tokenizer.tokenize(candidate), stem, remove_stopwords)
    ref = preprocess_tokens(tokenizer.tokenize(reference), stem, remove_stopwords)
    return {
        "R1": rouge_n(cand, ref, 1),
        "R2": rouge_n(cand, ref, 2),
        "RL": rouge_l(cand, ref),
    }
