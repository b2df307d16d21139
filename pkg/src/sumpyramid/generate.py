"""Abstractive summary generation through a chat-completion backend.

The prompt layout places the (truncated) article first and the
instruction after it. Completions are cached on disk keyed by the full
request content, so a corpus can be regenerated without repeating any
backend call, and a deterministic offline backend stands in for the
network during tests and desk runs.
"""

from __future__ import annotations

import hashlib
import logging
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable

import requests

from .exceptions import BackendUnavailable, EmptyCompletion, SumPyramidError, TemplateError
from .jsonl import canonical_dumps, read_json, sha256_text, write_json
from .records import SummaryRecord
from .text import DEFAULT_TOKENIZER, detokenize, truncate_text
from .validation import check_positive_int

logger = logging.getLogger(__name__)

SYSTEM_PROMPT = (
    "Generate a concise and coherent summary towards the given article "
    "and don't generate anything else. Make sure the summary is clear, "
    "informative, and well-structured."
)
USER_TEMPLATE = "Summarize the article in [sent num] sentences around [word num] words."

SENT_PLACEHOLDER = "[sent num]"
WORD_PLACEHOLDER = "[word num]"

DOC_TOKEN_LIMIT = 2048
DEFAULT_TEMPERATURE = 0.6


@dataclass(frozen=True)
class PromptSpec:
    system_prompt: str = SYSTEM_PROMPT
    user_template: str = USER_TEMPLATE
    sent_num: int = 3
    word_num: int = 64

    def __post_init__(self):
        check_positive_int(self.sent_num, "sent_num")
        check_positive_int(self.word_num, "word_num")
        for placeholder in (SENT_PLACEHOLDER, WORD_PLACEHOLDER):
            count = self.user_template.count(placeholder)
            if count != 1:
                raise TemplateError(
                    f"user_template must contain {placeholder!r} exactly once, found {count}"
                )


@dataclass(frozen=True)
class PromptRequest:
    doc_id: str
    system: str
    user: str
    document: str
    sent_num: int
    word_num: int


@dataclass(frozen=True)
class GenerationRecord:
    doc_id: str
    prompt_hash: str
    summary: str
    backend: str
    attempts: int


def render_prompt(spec: PromptSpec, document_text: str, tokenizer=None) -> tuple[str, str]:
    """Return (system, user); the user message is the truncated article
    followed by the instruction with both placeholders substituted."""
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    instruction = spec.user_template.replace(SENT_PLACEHOLDER, str(spec.sent_num)).replace(
        WORD_PLACEHOLDER, str(spec.word_num)
    )
    if SENT_PLACEHOLDER in instruction or WORD_PLACEHOLDER in instruction:
        raise TemplateError("placeholders survived substitution")
    document = truncate_text(document_text, DOC_TOKEN_LIMIT, tokenizer)
    return spec.system_prompt, f"{document}\n\n{instruction}"


def prompt_hash(system: str, user: str) -> str:
    return sha256_text(canonical_dumps([system, user]))


class MockBackend:
    """Offline stand-in: echoes the article's leading tokens at roughly
    the requested word count, with a seed-keyed deterministic jitter."""

    name = "mock"
    model = "mock"
    temperature = 0.0

    def __init__(self, seed: int = 0, tokenizer=None):
        self.seed = seed
        self.tokenizer = tokenizer or DEFAULT_TOKENIZER

    def complete(self, request: PromptRequest) -> str:
        digest = hashlib.sha256(
            f"{self.seed}:{prompt_hash(request.system, request.user)}".encode()
        ).digest()
        span = max(1, request.word_num // 10)
        k = request.word_num + int.from_bytes(digest[:4], "big") % (2 * span + 1) - span
        tokens = self.tokenizer.tokenize(request.document)[: max(1, k)]
        if not tokens:
            return ""
        body = detokenize(tokens)
        body = body[0].upper() + body[1:]
        return body if body.endswith((".", "!", "?")) else body + "."


class HttpBackend:
    """Chat-completion client: POST {model, messages, temperature}."""

    name = "live"

    def __init__(
        self,
        endpoint: str,
        model: str,
        temperature: float = DEFAULT_TEMPERATURE,
        api_key_env: str | None = None,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.api_key_env = api_key_env
        self.timeout = timeout

    def complete(self, request: PromptRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env)
            if not key:
                raise BackendUnavailable(f"environment variable {self.api_key_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": self.temperature,
        }
        resp = requests.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
        resp.raise_for_status()
        body = resp.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"malformed completion response: {exc}") from exc


class SummaryGenerator:
    """Drives prompt rendering, caching, retries, and record assembly.

    Parameters
    ----------
    spec : PromptSpec
    backend : object with ``complete(PromptRequest) -> str`` plus
        ``name``, ``model``, ``temperature`` attributes.
    cache_dir : str or None
        Directory for content-addressed completion cache; None disables
        caching.
    max_attempts : int
        Retry budget per document.
    backoff : float
        Base delay in seconds; doubles per failed attempt.
    """

    def __init__(
        self,
        spec: PromptSpec,
        backend,
        cache_dir: str | Path | None = None,
        max_attempts: int = 3,
        backoff: float = 0.5,
        tokenizer=None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        check_positive_int(max_attempts, "max_attempts")
        self.spec = spec
        self.backend = backend
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.tokenizer = tokenizer or DEFAULT_TOKENIZER
        self._sleep = sleep
        self._cache_lock = threading.Lock()

    def _cache_path(self, key: str) -> Path:
        assert self.cache_dir is not None
        return self.cache_dir / f"{key}.json"

    def _cache_key(self, system: str, user: str) -> str:
        return sha256_text(
            canonical_dumps([system, user, self.backend.model, self.backend.temperature])
        )

    def generate(self, doc_id: str, document_text: str) -> GenerationRecord:
        system, user = render_prompt(self.spec, document_text, self.tokenizer)
        phash = prompt_hash(system, user)
        key = self._cache_key(system, user)

        if self.cache_dir is not None:
            path = self._cache_path(key)
            if path.is_file():
                hit = read_json(path)
                return GenerationRecord(
                    doc_id=doc_id,
                    prompt_hash=phash,
                    summary=hit["summary"],
                    backend="cache",
                    attempts=int(hit.get("attempts", 1)),
                )

        request = PromptRequest(
            doc_id=doc_id,
            system=system,
            user=user,
            document=truncate_text(document_text, DOC_TOKEN_LIMIT, self.tokenizer),
            sent_num=self.spec.sent_num,
            word_num=self.spec.word_num,
        )
        last_error: Exception | None = None
        for attempt in range(1, self.max_attempts + 1):
            try:
                summary = self.backend.complete(request)
            except SumPyramidError:
                raise
            except Exception as exc:
                last_error = exc
                logger.warning("backend attempt %d/%d failed for %r: %s", attempt, self.max_attempts, doc_id, exc)
                if attempt < self.max_attempts:
                    self._sleep(self.backoff * 2 ** (attempt - 1))
                continue
            if not summary or not summary.strip():
                raise EmptyCompletion(f"backend returned blank text for {doc_id!r}")
            summary = summary.strip()
            if self.cache_dir is not None:
                with self._cache_lock:
                    write_json(self._cache_path(key), {"summary": summary, "attempts": attempt})
            return GenerationRecord(doc_id, phash, summary, self.backend.name, attempt)
        raise BackendUnavailable(
            f"backend failed for {doc_id!r} after {self.max_attempts} attempts: {last_error}"
        )

    def _one(self, item: tuple[str, str]):
        doc_id, text = item
        try:
            gen = self.generate(doc_id, text)
        except SumPyramidError as exc:
            return doc_id, None, f"{type(exc).__name__}: {exc}"
        record = SummaryRecord(
            id=doc_id,
            summary=gen.summary,
            tier="AD",
            token_len=len(self.tokenizer.tokenize(gen.summary)),
            tokenizer_id=self.tokenizer.tokenizer_id,
            provenance={
                "prompt_hash": gen.prompt_hash,
                "backend": gen.backend,
                "attempts": gen.attempts,
            },
        )
        return doc_id, record, None

    def generate_corpus(
        self, corpus: Iterable[tuple[str, str]], max_in_flight: int = 1
    ) -> tuple[list[SummaryRecord], list[dict]]:
        """Generate one AD record per document, in input order. Documents
        that exhaust the retry budget land in the reject list instead of
        being dropped."""
        check_positive_int(max_in_flight, "max_in_flight")
        items = list(corpus)
        if max_in_flight == 1:
            outcomes = [self._one(item) for item in items]
        else:
            with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
                outcomes = list(pool.map(self._one, items))
        records = [rec for _, rec, err in outcomes if err is None]
        rejects = [{"id": doc_id, "error": err} for doc_id, _, err in outcomes if err is not None]
        return records, rejects


def derive_spec(hd_mu: float, sent_num: int = 3, spec: PromptSpec | None = None) -> PromptSpec:
    """Dataset-specific prompt numbers: the word budget tracks the mean
    reference length and the sentence budget is per-dataset config."""
    base = spec or PromptSpec()
    return replace(base, sent_num=sent_num, word_num=max(1, round(hd_mu)))
