"""Tiered summarization corpus construction and evaluation.

Builds a three-tier training corpus (extractive pseudo-labels, LLM
abstractive summaries, human references), filters the synthetic tiers
to the human length profile, emits staged fine-tuning manifests, and
evaluates outputs with ROUGE, ANOVA, and an element-coverage protocol.
"""

from .evaluate import (
    ElementAnnotation,
    ScoreReport,
    Verdict,
    anova_one_way,
    informativeness,
    length_prescreen,
    score_corpus,
    verdict,
)
from .exceptions import SumPyramidError
from .extract import ExtractionResult, GapSentenceExtractor
from .generate import (
    HttpBackend,
    MockBackend,
    PromptSpec,
    SummaryGenerator,
    render_prompt,
)
from .infotheory import (
    JointDistribution,
    check_assumption,
    conditional_entropy,
    entropy,
    gains,
    identity_audit,
    monte_carlo,
    sample_joint,
)
from .metrics import RougeScore, rouge_l, rouge_n, rouge_suite
from .pyramid import PyramidConfig, assemble, pyramid_stats, split_corpus, subsample_hd
from .records import SummaryRecord
from .resample import GaussianLengthResampler, LengthModel, fit_length_model, resample_records
from .schedule import StageManifest, execute, plan
from .text import (
    Document,
    Sentence,
    VocabTokenizer,
    WordTokenizer,
    make_document,
    ngrams,
    split_sentences,
    truncate,
)

__version__ = "0.1.0"

__all__ = [
    "Document",
    "ElementAnnotation",
    "ExtractionResult",
    "GapSentenceExtractor",
    "GaussianLengthResampler",
    "HttpBackend",
    "JointDistribution",
    "LengthModel",
    "MockBackend",
    "PromptSpec",
    "PyramidConfig",
    "RougeScore",
    "ScoreReport",
    "Sentence",
    "StageManifest",
    "SumPyramidError",
    "SummaryGenerator",
    "SummaryRecord",
    "Verdict",
    "VocabTokenizer",
    "WordTokenizer",
    "anova_one_way",
    "assemble",
    "check_assumption",
    "conditional_entropy",
    "entropy",
    "execute",
    "fit_length_model",
    "gains",
    "identity_audit",
    "informativeness",
    "length_prescreen",
    "make_document",
    "monte_carlo",
    "ngrams",
    "plan",
    "pyramid_stats",
    "render_prompt",
    "resample_records",
    "rouge_l",
    "rouge_n",
    "rouge_suite",
    "sample_joint",
    "score_corpus",
    "split_corpus",
    "split_sentences",
    "subsample_hd",
    "truncate",
    "verdict",
]
