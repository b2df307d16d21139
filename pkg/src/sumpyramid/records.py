"""Corpus and summary record schemas used on every JSONL wire format.

Corpus line: {"id": str, "document": str}
Summary line: {"id": str, "summary": str, "tier": str, "token_len": int,
               "tokenizer_id": str, ...}
Extra keys on a summary line (score, sentence_index, prompt_hash, ...)
round-trip through the record's provenance mapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .exceptions import CorpusReadError, TierViolation, TokenizerMismatch
from .jsonl import read_jsonl

TIERS = ("ED", "AD", "HD")

_BASE_KEYS = ("id", "summary", "tier", "token_len", "tokenizer_id", "document")


@dataclass
class SummaryRecord:
    id: str
    summary: str
    tier: str
    token_len: int
    tokenizer_id: str
    document: str | None = None
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        obj = {
            "id": self.id,
            "summary": self.summary,
            "tier": self.tier,
            "token_len": self.token_len,
            "tokenizer_id": self.tokenizer_id,
        }
        if self.document is not None:
            obj["document"] = self.document
        for key, value in self.provenance.items():
            if key not in _BASE_KEYS:
                obj[key] = value
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "SummaryRecord":
        missing = [k for k in ("id", "summary", "tier", "token_len") if k not in obj]
        if missing:
            raise CorpusReadError(f"summary record missing keys: {missing}")
        return cls(
            id=str(obj["id"]),
            summary=str(obj["summary"]),
            tier=str(obj["tier"]),
            token_len=int(obj["token_len"]),
            tokenizer_id=str(obj.get("tokenizer_id", "word")),
            document=obj.get("document"),
            provenance={k: v for k, v in obj.items() if k not in _BASE_KEYS},
        )

    def validate(self, tokenizer, expected_tokenizer_id: str | None = None) -> None:
        if self.tier not in TIERS:
            raise TierViolation(f"record {self.id!r}: unknown tier {self.tier!r}")
        if expected_tokenizer_id is not None and self.tokenizer_id != expected_tokenizer_id:
            raise TokenizerMismatch(
                f"record {self.id!r}: tokenizer {self.tokenizer_id!r} != expected {expected_tokenizer_id!r}"
            )
        actual = len(tokenizer.tokenize(self.summary))
        if actual != self.token_len:
            raise TierViolation(
                f"record {self.id!r}: token_len {self.token_len} != measured {actual}"
            )


def iter_corpus(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield (id, document) pairs from a corpus JSONL file."""
    for lineno, obj in enumerate(read_jsonl(path), start=1):
        if "id" not in obj or "document" not in obj:
            raise CorpusReadError(f"{path}:{lineno}: corpus record needs 'id' and 'document'")
        yield str(obj["id"]), str(obj["document"])


def read_summary_records(path: str | Path) -> list[SummaryRecord]:
    return [SummaryRecord.from_json(obj) for obj in read_jsonl(path)]


def write_summary_records(path: str | Path, records) -> int:
    from .jsonl import write_jsonl

    return write_jsonl(path, (rec.to_json() for rec in records))
