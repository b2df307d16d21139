"""Single-sentence extractive pseudo-labeling.

Each document's pseudo-summary is the sentence whose ROUGE-1 score
against the concatenation of all its other sentences is highest, ties
broken toward the earlier index. The scorer avoids materializing the
complement: with c_i the sentence's unigram counter and T the whole
document's, the clipped overlap against the rest is
sum_t min(c_i[t], T[t] - c_i[t]).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import EmptyDocument
from .records import SummaryRecord
from .text import DEFAULT_TOKENIZER, Document, make_document, truncate_document

logger = logging.getLogger(__name__)

VARIANTS = ("f1", "recall")


@dataclass(frozen=True)
class ExtractionResult:
    doc_id: str
    chosen_index: int
    score: float
    pseudo_summary: str


class GapSentenceExtractor(BaseEstimator, TransformerMixin):
    """Select each document's most representative sentence.

    Parameters
    ----------
    variant : {"f1", "recall"}
        Which ROUGE-1 component ranks sentences.
    doc_trunc : int or None
        Token budget applied to documents before extraction; None
        disables truncation.
    tokenizer : object or None
        Tokenizer used for sentence tokens; None selects the word
        tokenizer.
    """

    def __init__(self, variant: str = "f1", doc_trunc: int | None = 1024, tokenizer=None):
        self.variant = variant
        self.doc_trunc = doc_trunc
        self.tokenizer = tokenizer

    def _check_params(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        return self.tokenizer or DEFAULT_TOKENIZER

    def fit(self, X=None, y=None):
        self._check_params()
        return self

    def transform(self, X: Iterable[Document]) -> list[ExtractionResult]:
        return [self.extract(doc) for doc in X]

    def extract(self, doc: Document) -> ExtractionResult:
        tokenizer = self._check_params()
        if self.doc_trunc is not None:
            doc = truncate_document(doc, self.doc_trunc, tokenizer)
        return self._select(doc)

    def _select(self, doc: Document) -> ExtractionResult:
        n = doc.n_sentences
        if n == 0:
            raise EmptyDocument(f"document {doc.id!r} has no sentences")
        if n == 1:
            return ExtractionResult(doc.id, 0, 0.0, doc.sentences[0].text)

        counters = [Counter(sent.tokens) for sent in doc.sentences]
        lengths = [len(sent.tokens) for sent in doc.sentences]
        total = Counter()
        for c in counters:
            total.update(c)
        total_len = sum(lengths)

        best_index = 0
        best_score = -1.0
        for i, (counter, m) in enumerate(zip(counters, lengths)):
            overlap = 0
            for token, count in counter.items():
                rest = total[token] - count
                overlap += count if count < rest else rest
            rest_len = total_len - m
            precision = overlap / m
            recall = overlap / rest_len if rest_len else 0.0
            if self.variant == "recall":
                score = recall
            elif precision + recall == 0.0:
                score = 0.0
            else:
                score = 2.0 * precision * recall / (precision + recall)
            if score > best_score:
                best_score = score
                best_index = i
        return ExtractionResult(doc.id, best_index, best_score, doc.sentences[best_index].text)

    def extract_corpus(
        self, corpus: Iterable[tuple[str, str]]
    ) -> Iterator[SummaryRecord]:
        """Map (id, document_text) pairs to ED summary records in input
        order; documents with no usable sentences are logged and skipped."""
        tokenizer = self._check_params()
        for doc_id, text in corpus:
            doc = make_document(doc_id, text, tokenizer)
            if doc.n_sentences == 0:
                logger.warning("skipping document %r: no usable sentences", doc_id)
                continue
            if self.doc_trunc is not None:
                doc = truncate_document(doc, self.doc_trunc, tokenizer)
            result = self._select(doc)
            yield SummaryRecord(
                id=doc_id,
                summary=result.pseudo_summary,
                tier="ED",
                token_len=len(doc.sentences[result.chosen_index].tokens),
                tokenizer_id=tokenizer.tokenizer_id,
                provenance={"score": result.score, "sentence_index": result.chosen_index},
            )
