"""Summary decoding from a saved checkpoint.

Greedy decoding is fully deterministic for a fixed checkpoint; beam
search keeps a fixed-width frontier and picks the finished hypothesis
with the best length-normalized score. Marker ids (PAD and BOS) are
masked out of every step so generated ids always decode as bytes.
"""

import json
import logging
from pathlib import Path

import torch

from .data import collate, to_example
from .errors import SchemaError
from .model import BOS, EOS, PAD, TinySeq2Seq, load_checkpoint

logger = logging.getLogger(__name__)

STRATEGIES = ("greedy", "beam")


def _encode_source(model: TinySeq2Seq, document: str, doc_limit: int):
    ex = to_example("", document, "", doc_limit, 2)
    tensors = collate([ex])
    memory = model.encode(tensors["src"], tensors["src_pad"])
    return memory, tensors["src_pad"]


def _step_logits(model: TinySeq2Seq, ys: list[int], memory, src_pad) -> torch.Tensor:
    tgt_in = torch.tensor([ys], dtype=torch.long)
    logits = model.decode(tgt_in, memory, src_pad)[0, -1]
    logits[PAD] = float("-inf")
    logits[BOS] = float("-inf")
    return logits


@torch.no_grad()
def greedy_decode(model: TinySeq2Seq, document: str, max_len: int, doc_limit: int) -> str:
    memory, src_pad = _encode_source(model, document, doc_limit)
    ys = [BOS]
    for _ in range(max_len):
        nxt = int(_step_logits(model, ys, memory, src_pad).argmax())
        if nxt == EOS:
            break
        ys.append(nxt)
    return bytes(ys[1:]).decode("utf-8", errors="replace")


@torch.no_grad()
def beam_decode(model: TinySeq2Seq, document: str, max_len: int, doc_limit: int, width: int) -> str:
    if width < 1:
        raise ValueError(f"beam width must be >= 1, got {width}")
    memory, src_pad = _encode_source(model, document, doc_limit)
    live: list[tuple[float, list[int]]] = [(0.0, [BOS])]
    finished: list[tuple[float, list[int]]] = []
    for _ in range(max_len):
        candidates: list[tuple[float, list[int]]] = []
        for score, ys in live:
            logprobs = torch.log_softmax(_step_logits(model, ys, memory, src_pad), dim=-1)
            top = torch.topk(logprobs, width)
            for lp, tok in zip(top.values.tolist(), top.indices.tolist()):
                candidates.append((score + lp, ys + [tok]))
        candidates.sort(key=lambda c: c[0], reverse=True)
        live = []
        for score, ys in candidates[: width * 2]:
            if ys[-1] == EOS:
                finished.append((score / (len(ys) - 1), ys[:-1]))
            elif len(live) < width:
                live.append((score, ys))
        if len(finished) >= width or not live:
            break
    if not finished:
        finished = [(score / max(1, len(ys) - 1), ys) for score, ys in live]
    finished.sort(key=lambda c: c[0], reverse=True)
    best = finished[0][1]
    return bytes(best[1:]).decode("utf-8", errors="replace")


def predict(
    checkpoint: str | Path,
    documents_path: str | Path,
    out_path: str | Path,
    strategy: str = "greedy",
    beam_width: int = 4,
    max_len: int = 64,
    doc_limit: int = 1024,
) -> int:
    """Decode one summary per input document, id-aligned, in input order.

    The documents file is JSONL with id and document fields; the output
    is JSONL with id and summary. An empty input yields an empty output
    file. Returns the number of summaries written.
    """
    if strategy not in STRATEGIES:
        raise SchemaError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    if max_len < 1 or doc_limit < 1 or beam_width < 1:
        raise SchemaError("max_len, doc_limit, and beam_width must all be >= 1")
    model = load_checkpoint(checkpoint)
    documents_path = Path(documents_path)
    if not documents_path.is_file():
        raise SchemaError(f"documents file not found: {documents_path}")

    rows: list[tuple[str, str]] = []
    with open(documents_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{documents_path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "id" not in obj or "document" not in obj:
                raise SchemaError(f"{documents_path}:{lineno}: record needs id and document fields")
            rows.append((str(obj["id"]), str(obj["document"])))

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as fh:
        for doc_id, document in rows:
            if strategy == "greedy":
                summary = greedy_decode(model, document, max_len, doc_limit)
            else:
                summary = beam_decode(model, document, max_len, doc_limit, beam_width)
            fh.write(json.dumps({"id": doc_id, "summary": summary}, sort_keys=True) + "\n")
    logger.info("wrote %d summaries to %s", len(rows), out_path)
    return len(rows)
