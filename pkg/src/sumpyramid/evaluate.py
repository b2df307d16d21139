"""Summary evaluation: ROUGE scoring, one-way ANOVA, and the
reference-based informativeness protocol.

The protocol first screens out summaries whose length is far from the
reference (an over- or under-long summary cannot win), then compares
how many gold elements (entities, dates, events, results) each system
summary covers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .exceptions import AlignmentError, DegenerateGroups
from .metrics import rouge_suite

METRIC_KEYS = ("R1", "R2", "RL")

ELEMENT_CATEGORIES = ("entities", "dates", "events", "results")

DEFAULT_LENGTH_TOLERANCE = 1.0


# --- corpus scoring -------------------------------------------------------


@dataclass(frozen=True)
class ScoreReport:
    n: int
    means: dict
    per_pair: list

    def to_json(self) -> dict:
        return {"n": self.n, "means": self.means, "per_pair": self.per_pair}


def score_corpus(
    pairs: Iterable[tuple[str, str]],
    tokenizer=None,
    extra_scores: dict[str, Sequence[float]] | None = None,
) -> ScoreReport:
    """Score (generated, reference) pairs; means are on the 0-100 scale.

    extra_scores folds in precomputed per-pair values from external
    scorers (one list per metric name, aligned with the pairs).
    """
    pairs = list(pairs)
    if not pairs:
        raise AlignmentError("nothing to score: zero aligned pairs")
    per_pair = []
    for generated, reference in pairs:
        suite = rouge_suite(generated, reference, tokenizer)
        per_pair.append({key: suite[key].f1 for key in METRIC_KEYS})
    means = {
        key: 100.0 * sum(row[key] for row in per_pair) / len(per_pair) for key in METRIC_KEYS
    }
    if extra_scores:
        for name, values in extra_scores.items():
            values = list(values)
            if len(values) != len(pairs):
                raise AlignmentError(
                    f"external scores {name!r}: {len(values)} values for {len(pairs)} pairs"
                )
            for row, value in zip(per_pair, values):
                row[name] = float(value)
            means[name] = sum(values) / len(values)
    return ScoreReport(n=len(pairs), means=means, per_pair=per_pair)


def align_by_id(
    predictions: Iterable[dict], references: Iterable[dict]
) -> list[tuple[str, str, str]]:
    """Join two {"id", "summary"} streams on id, reference order."""
    pred = {}
    for obj in predictions:
        if "id" not in obj or "summary" not in obj:
            raise AlignmentError("prediction records need 'id' and 'summary'")
        if obj["id"] in pred:
            raise AlignmentError(f"duplicate prediction id {obj['id']!r}")
        pred[str(obj["id"])] = str(obj["summary"])
    out = []
    for obj in references:
        if "id" not in obj or "summary" not in obj:
            raise AlignmentError("reference records need 'id' and 'summary'")
        ref_id = str(obj["id"])
        if ref_id not in pred:
            raise AlignmentError(f"no prediction for reference id {ref_id!r}")
        out.append((ref_id, pred.pop(ref_id), str(obj["summary"])))
    if pred:
        raise AlignmentError(f"{len(pred)} predictions have no matching reference")
    return out


# --- one-way ANOVA --------------------------------------------------------


def _betacf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 3e-14) -> float:
    """Continued fraction for the regularized incomplete beta (modified
    Lentz iteration)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f_stat: float, df1: float, df2: float) -> float:
    """Upper-tail probability of the F distribution."""
    if f_stat <= 0.0:
        return 1.0
    x = df2 / (df2 + df1 * f_stat)
    return reg_inc_beta(df2 / 2.0, df1 / 2.0, x)


def anova_one_way(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """Classic equal-variance one-way ANOVA; returns (F, p)."""
    if len(groups) < 2:
        raise DegenerateGroups(f"need at least 2 groups, got {len(groups)}")
    data = [[float(x) for x in g] for g in groups]
    for i, g in enumerate(data):
        if len(g) < 2:
            raise DegenerateGroups(f"group {i} has {len(g)} observations, need at least 2")
    n_total = sum(len(g) for g in data)
    k = len(data)
    grand = sum(sum(g) for g in data) / n_total
    group_means = [sum(g) / len(g) for g in data]
    ss_between = sum(len(g) * (m - grand) ** 2 for g, m in zip(data, group_means))
    ss_within = sum(sum((x - m) ** 2 for x in g) for g, m in zip(data, group_means))
    df1 = k - 1
    df2 = n_total - k
    if ss_within == 0.0:
        raise DegenerateGroups("zero within-group variance in every group")
    f_stat = (ss_between / df1) / (ss_within / df2)
    return f_stat, f_sf(f_stat, df1, df2)


# --- informativeness protocol ---------------------------------------------


def normalize_element(text: str) -> str:
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class ElementAnnotation:
    entities: frozenset[str]
    dates: frozenset[str]
    events: frozenset[str]
    results: frozenset[str]

    @classmethod
    def build(
        cls,
        entities: Iterable[str] = (),
        dates: Iterable[str] = (),
        events: Iterable[str] = (),
        results: Iterable[str] = (),
        comparator: Callable[[str], str] = normalize_element,
    ) -> "ElementAnnotation":
        def norm(values):
            out = {comparator(str(v)) for v in values}
            out.discard("")
            return frozenset(out)

        return cls(norm(entities), norm(dates), norm(events), norm(results))

    @classmethod
    def from_json(cls, obj: dict, comparator: Callable[[str], str] = normalize_element):
        return cls.build(
            entities=obj.get("entities", ()),
            dates=obj.get("dates", ()),
            events=obj.get("events", ()),
            results=obj.get("results", ()),
            comparator=comparator,
        )

    def category(self, name: str) -> frozenset[str]:
        return getattr(self, name)

    def total(self) -> int:
        return sum(len(self.category(c)) for c in ELEMENT_CATEGORIES)


def informativeness(gold: ElementAnnotation, sys: ElementAnnotation) -> int:
    """Count of gold elements the system summary covers, over all four
    categories."""
    return sum(len(gold.category(c) & sys.category(c)) for c in ELEMENT_CATEGORIES)


def length_prescreen(
    candidate_len: float, reference_len: float, tolerance_ratio: float = DEFAULT_LENGTH_TOLERANCE
) -> bool:
    """True (pass) iff the candidate length is within the tolerance band
    around the reference length."""
    if candidate_len < 0 or reference_len < 0:
        raise ValueError("lengths must be non-negative")
    if tolerance_ratio <= 0:
        raise ValueError("tolerance_ratio must be positive")
    lower = reference_len / (1.0 + tolerance_ratio)
    upper = reference_len * (1.0 + tolerance_ratio)
    return lower <= candidate_len <= upper


@dataclass(frozen=True)
class Verdict:
    outcome: str
    info_1: int
    info_2: int
    length_prescreen: str

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "info_1": self.info_1,
            "info_2": self.info_2,
            "length_prescreen": self.length_prescreen,
        }


def verdict(
    gold: ElementAnnotation,
    sys1: ElementAnnotation,
    sys2: ElementAnnotation,
    len1: float,
    len2: float,
    reference_len: float,
    tolerance_ratio: float = DEFAULT_LENGTH_TOLERANCE,
) -> Verdict:
    """System-1-perspective comparison. A length-screen failure loses
    outright; with both summaries screened out the result is Equal; with
    both in band the higher element coverage wins."""
    info_1 = informativeness(gold, sys1)
    info_2 = informativeness(gold, sys2)
    pass1 = length_prescreen(len1, reference_len, tolerance_ratio)
    pass2 = length_prescreen(len2, reference_len, tolerance_ratio)
    if not pass1 and not pass2:
        return Verdict("Equal", info_1, info_2, "both_fail")
    if not pass1:
        return Verdict("Fail", info_1, info_2, "sys1_fail")
    if not pass2:
        return Verdict("Win", info_1, info_2, "sys2_fail")
    if info_1 > info_2:
        outcome = "Win"
    elif info_1 < info_2:
        outcome = "Fail"
    else:
        outcome = "Equal"
    return Verdict(outcome, info_1, info_2, "both_pass")
