"""Gaussian length modeling and interval filtering.

Reference-summary token lengths are modeled as a Gaussian; synthetic
records whose summaries fall outside mu +/- 2 sigma are dropped so the
synthetic tiers match the human length profile. Moments are accumulated
as exact rationals: mean and variance of integer lengths come out as
ratios of integers, immune to cancellation error.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DegenerateSigmaWarning, InsufficientData, TokenizerMismatch
from .jsonl import digest_obj, read_json, write_json
from .records import SummaryRecord


@dataclass(frozen=True)
class LengthModel:
    mu: float
    sigma: float
    lower: float
    upper: float
    sample_count: int
    tokenizer_id: str
    sample_digest: str = ""

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "sigma": self.sigma,
            "lower": self.lower,
            "upper": self.upper,
            "sample_count": self.sample_count,
            "tokenizer_id": self.tokenizer_id,
            "sample_digest": self.sample_digest,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LengthModel":
        return cls(
            mu=float(obj["mu"]),
            sigma=float(obj["sigma"]),
            lower=float(obj["lower"]),
            upper=float(obj["upper"]),
            sample_count=int(obj["sample_count"]),
            tokenizer_id=str(obj["tokenizer_id"]),
            sample_digest=str(obj.get("sample_digest", "")),
        )

    def save(self, path: str | Path) -> None:
        write_json(path, self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "LengthModel":
        return cls.from_json(read_json(path))


def exact_moments(lengths: Sequence[int]) -> tuple[Fraction, Fraction]:
    """Mean and sample variance (n-1 divisor) as exact rationals."""
    n = len(lengths)
    if n < 2:
        raise InsufficientData(f"need at least 2 lengths to fit, got {n}")
    values = [int(x) for x in lengths]
    s = sum(values)
    # sum((x - mean)^2) == sum((n*x - s)^2) / n^2, all in integers
    sq = sum((n * x - s) ** 2 for x in values)
    return Fraction(s, n), Fraction(sq, n * n * (n - 1))


def fit_length_model(
    lengths: Sequence[int], tokenizer_id: str = "word", n_sigma: float = 2.0
) -> LengthModel:
    for x in lengths:
        if int(x) < 0:
            raise ValueError(f"lengths must be non-negative, got {x}")
    mean, var = exact_moments(lengths)
    mu = float(mean)
    sigma = math.sqrt(var)
    if sigma == 0.0:
        warnings.warn(
            "zero length variance: interval collapses to a single length",
            DegenerateSigmaWarning,
            stacklevel=2,
        )
    return LengthModel(
        mu=mu,
        sigma=sigma,
        lower=mu - n_sigma * sigma,
        upper=mu + n_sigma * sigma,
        sample_count=len(lengths),
        tokenizer_id=tokenizer_id,
        sample_digest=digest_obj([int(x) for x in lengths]),
    )


def resample_records(
    records: Iterable[SummaryRecord],
    model: LengthModel,
    inclusive: bool = True,
) -> tuple[list[SummaryRecord], int]:
    """Keep records whose token_len lies in the model's interval; order
    preserved. Returns (kept, dropped_count)."""
    kept: list[SummaryRecord] = []
    dropped = 0
    for rec in records:
        if rec.tokenizer_id != model.tokenizer_id:
            raise TokenizerMismatch(
                f"record {rec.id!r} measured with {rec.tokenizer_id!r}, "
                f"model fitted with {model.tokenizer_id!r}"
            )
        if inclusive:
            inside = model.lower <= rec.token_len <= model.upper
        else:
            inside = model.lower < rec.token_len < model.upper
        if inside:
            kept.append(rec)
        else:
            dropped += 1
    return kept, dropped


def resample_report(n_input: int, n_kept: int) -> dict:
    return {
        "input": n_input,
        "kept": n_kept,
        "dropped": n_input - n_kept,
        "retention_rate": (n_kept / n_input) if n_input else 0.0,
    }


class GaussianLengthResampler(BaseEstimator, TransformerMixin):
    """Fit a Gaussian to reference lengths, then filter records to the
    mu +/- n_sigma interval.

    Parameters
    ----------
    n_sigma : float
        Interval half-width in standard deviations.
    inclusive : bool
        Whether interval bounds themselves are kept.
    tokenizer_id : str
        Identity of the tokenizer the lengths were measured with.

    Attributes
    ----------
    mu_, sigma_, lower_, upper_ : float
    sample_count_ : int
    model_ : LengthModel
    """

    def __init__(self, n_sigma: float = 2.0, inclusive: bool = True, tokenizer_id: str = "word"):
        self.n_sigma = n_sigma
        self.inclusive = inclusive
        self.tokenizer_id = tokenizer_id

    def fit(self, X, y=None):
        if self.n_sigma <= 0:
            raise ValueError(f"n_sigma must be positive, got {self.n_sigma}")
        lengths = [x.token_len if isinstance(x, SummaryRecord) else int(x) for x in X]
        self.model_ = fit_length_model(lengths, self.tokenizer_id, self.n_sigma)
        self.mu_ = self.model_.mu
        self.sigma_ = self.model_.sigma
        self.lower_ = self.model_.lower
        self.upper_ = self.model_.upper
        self.sample_count_ = self.model_.sample_count
        return self

    def transform(self, X: Iterable[SummaryRecord]) -> list[SummaryRecord]:
        if not hasattr(self, "model_"):
            raise InsufficientData("resampler is not fitted")
        kept, self.dropped_count_ = resample_records(X, self.model_, self.inclusive)
        return kept
