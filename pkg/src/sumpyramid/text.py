"""Sentence segmentation, tokenization, and n-gram extraction.

Everything here is a pure function of its inputs: same text in, same
tokens out, on any platform. That property is what makes corpus digests
and golden files stable, so changes to normalization or segmentation
rules are breaking changes.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import InvalidN, VocabularyMissing
from .jsonl import sha256_text
from .validation import check_positive_int, check_text, check_tokens

# Words or single punctuation marks; whitespace never survives.
_WORD_RE = re.compile(r"\w+|[^\w\s]")

# Terminal punctuation run followed by whitespace ends a sentence.
_BOUNDARY_RE = re.compile(r"([.!?]+)(\s+)")

# The word immediately before a candidate boundary period.
_LAST_WORD_RE = re.compile(r"(\w+)$")


def _load_default_abbreviations() -> frozenset[str]:
    text = resources.files("sumpyramid.data").joinpath("abbreviations.txt").read_text("utf-8")
    return frozenset(
        line.strip().lower() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


class WordTokenizer:
    """Lowercased word-level tokenizer: NFC normalize, lowercase, then
    split into word runs and single punctuation marks."""

    tokenizer_id = "word"

    def tokenize(self, text: str) -> list[str]:
        check_text(text)
        normalized = unicodedata.normalize("NFC", text).lower()
        return _WORD_RE.findall(normalized)

    def spans(self, text: str) -> tuple[str, list[tuple[int, int]]]:
        """Token spans over the NFC form of ``text`` with casing intact,
        for truncating text without re-joining tokens."""
        check_text(text)
        normalized = unicodedata.normalize("NFC", text)
        return normalized, [m.span() for m in _WORD_RE.finditer(normalized.lower())]

    def get_params(self, deep: bool = True) -> dict:
        return {}


class VocabTokenizer:
    """Greedy longest-match subword tokenizer over an external vocabulary.

    The vocabulary file holds one token per line (UTF-8, rank = line
    number). Within each whitespace-delimited chunk the longest vocabulary
    entry at the cursor wins; characters matched by no entry fall back to
    their UTF-8 bytes as ``<0xXX>`` tokens.
    """

    def __init__(self, vocab_path: str | Path):
        path = Path(vocab_path)
        if not path.is_file():
            raise VocabularyMissing(f"vocabulary file not found: {path}")
        raw = path.read_text("utf-8")
        self.vocab = frozenset(line for line in raw.splitlines() if line)
        if not self.vocab:
            raise VocabularyMissing(f"vocabulary file is empty: {path}")
        self._max_len = max(len(tok) for tok in self.vocab)
        self.tokenizer_id = "vocab:" + sha256_text(raw)[:12]

    def tokenize(self, text: str) -> list[str]:
        check_text(text)
        normalized = unicodedata.normalize("NFC", text).lower()
        out: list[str] = []
        for chunk in normalized.split():
            i = 0
            while i < len(chunk):
                for width in range(min(self._max_len, len(chunk) - i), 0, -1):
                    piece = chunk[i : i + width]
                    if piece in self.vocab:
                        out.append(piece)
                        i += width
                        break
                else:
                    out.extend(f"<0x{b:02X}>" for b in chunk[i].encode("utf-8"))
                    i += 1
        return out

    def get_params(self, deep: bool = True) -> dict:
        return {"tokenizer_id": self.tokenizer_id}


DEFAULT_TOKENIZER = WordTokenizer()


def get_tokenizer(mode: str = "word", vocab_path: str | Path | None = None):
    if mode == "word":
        return DEFAULT_TOKENIZER
    if mode == "external_vocab":
        if vocab_path is None:
            raise VocabularyMissing("external_vocab mode requires a vocabulary file")
        return VocabTokenizer(vocab_path)
    raise ValueError(f"unknown tokenizer mode {mode!r}")


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    sentences: tuple[Sentence, ...] = field(default_factory=tuple)

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    def tokens(self) -> list[str]:
        out: list[str] = []
        for sent in self.sentences:
            out.extend(sent.tokens)
        return out


def split_sentences(
    raw_text: str, abbreviations: frozenset[str] | None = None
) -> list[str]:
    """Split on terminal punctuation (., !, ?) followed by whitespace.

    A lone period does not end a sentence when the word before it is a
    known abbreviation or a single letter (initials).
    """
    check_text(raw_text, "raw_text")
    if abbreviations is None:
        abbreviations = _ABBREVIATIONS
    pieces: list[str] = []
    start = 0
    for m in _BOUNDARY_RE.finditer(raw_text):
        punct = m.group(1)
        if punct == ".":
            before = _LAST_WORD_RE.search(raw_text, start, m.start())
            if before is not None:
                word = before.group(1).lower()
                if word in abbreviations or (len(word) == 1 and word.isalpha()):
                    continue
        pieces.append(raw_text[start : m.end(1)])
        start = m.end()
    tail = raw_text[start:].strip()
    if tail:
        pieces.append(tail)
    return [p.strip() for p in pieces if p.strip()]


def make_document(
    doc_id: str,
    raw_text: str,
    tokenizer=None,
    abbreviations: frozenset[str] | None = None,
) -> Document:
    """Build a Document whose sentences all have at least one token."""
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    sentences = []
    for text in split_sentences(raw_text, abbreviations):
        tokens = tuple(tokenizer.tokenize(text))
        if tokens:
            sentences.append(Sentence(index=len(sentences), text=text, tokens=tokens))
    return Document(id=doc_id, raw_text=raw_text, sentences=tuple(sentences))


def truncate_document(doc: Document, limit: int, tokenizer=None) -> Document:
    """Keep leading whole sentences while the running token count stays
    within ``limit``; an over-long first sentence is cut to the limit."""
    check_positive_int(limit, "limit")
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    kept: list[Sentence] = []
    total = 0
    for sent in doc.sentences:
        if total + len(sent.tokens) > limit:
            break
        kept.append(sent)
        total += len(sent.tokens)
    if not kept and doc.sentences:
        first = doc.sentences[0]
        text = truncate_text(first.text, limit, tokenizer)
        kept = [Sentence(index=0, text=text, tokens=first.tokens[:limit])]
    return Document(id=doc.id, raw_text=doc.raw_text, sentences=tuple(kept))


def ngrams(seq: Sequence[str], n: int) -> Counter:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidN(f"n must be a positive integer, got {n!r}")
    tokens = check_tokens(seq, "seq")
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def truncate(seq: Sequence[str], limit: int) -> list[str]:
    check_positive_int(limit, "limit")
    return list(seq[:limit])


def truncate_text(text: str, limit: int, tokenizer=None) -> str:
    """First ``limit`` tokens of ``text`` as a substring of its NFC form,
    casing and inner whitespace preserved."""
    check_positive_int(limit, "limit")
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    if not hasattr(tokenizer, "spans"):
        return detokenize(truncate(tokenizer.tokenize(text), limit))
    normalized, spans = tokenizer.spans(text)
    if len(spans) <= limit:
        return normalized
    return normalized[: spans[limit - 1][1]]


def detokenize(tokens: Iterable[str]) -> str:
    return " ".join(tokens)


def count_tokens(text: str, tokenizer=None) -> int:
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    return len(tokenizer.tokenize(text))


_ABBREVIATIONS = _load_default_abbreviations()
