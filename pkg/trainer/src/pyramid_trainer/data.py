"""Stage-manifest parsing and tier data loading.

The manifest and tier files are produced by an external planner; this
module re-validates everything it consumes rather than trusting the
producer. Tier records carry a summary and optionally the source
document; when the document is absent the summary doubles as the
source, which turns training into a copy task. That is a legitimate
smoke-scale signal: the loss still has to fall for the run to count.
"""

import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path

import torch

from .errors import DataError, SchemaError
from .model import BOS, EOS, PAD

logger = logging.getLogger(__name__)

MANIFEST_KEYS = ("stage", "data_tiers", "epochs", "learning_rate", "batch_size", "init_from")
INIT_MODES = ("pretrained", "previous_stage_checkpoint")


def load_manifest(path: str | Path) -> dict:
    """Read and validate a stage manifest, normalizing numeric fields."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    try:
        obj = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError(f"manifest {path} must be a JSON object")
    missing = [k for k in MANIFEST_KEYS if k not in obj]
    if missing:
        raise SchemaError(f"manifest {path} missing keys: {', '.join(missing)}")

    tiers = obj["data_tiers"]
    if not isinstance(tiers, list) or not tiers or not all(isinstance(t, str) for t in tiers):
        raise SchemaError(f"data_tiers must be a non-empty list of strings, got {tiers!r}")
    manifest = {
        "stage": str(obj["stage"]),
        "data_tiers": [str(t) for t in tiers],
        "epochs": int(obj["epochs"]),
        "learning_rate": float(obj["learning_rate"]),
        "batch_size": int(obj["batch_size"]),
        "init_from": str(obj["init_from"]),
        "doc_trunc": int(obj.get("doc_trunc", 1024)),
        "summary_trunc": int(obj.get("summary_trunc", 128)),
        "seed": int(obj.get("seed", 0)),
        "data_dir": str(obj.get("data_dir", ".")),
    }
    for key in ("epochs", "batch_size", "doc_trunc", "summary_trunc"):
        if manifest[key] < 1:
            raise SchemaError(f"{key} must be a positive integer, got {manifest[key]}")
    if manifest["learning_rate"] <= 0:
        raise SchemaError(f"learning_rate must be positive, got {manifest['learning_rate']}")
    if manifest["init_from"] not in INIT_MODES:
        raise SchemaError(f"unknown init_from {manifest['init_from']!r}")
    return manifest


def resolve_data_dir(manifest_path: str | Path, manifest: dict) -> Path:
    """Tier files live at data_dir interpreted relative to the manifest."""
    return (Path(manifest_path).parent / manifest["data_dir"]).resolve()


@dataclass(frozen=True)
class Example:
    """One training pair, already tokenized to byte ids."""

    doc_id: str
    src: tuple[int, ...]
    tgt_in: tuple[int, ...]
    labels: tuple[int, ...]


def to_example(doc_id: str, source: str, target: str, doc_trunc: int, summary_trunc: int) -> Example:
    from .model import encode_text

    src = encode_text(source, doc_trunc)
    tgt = list(target.encode("utf-8"))[: summary_trunc - 1]
    return Example(
        doc_id=doc_id,
        src=tuple(src),
        tgt_in=tuple([BOS] + tgt),
        labels=tuple(tgt + [EOS]),
    )


def load_tier_records(data_dir: Path, tiers: list[str], doc_trunc: int, summary_trunc: int) -> tuple[list[Example], dict]:
    """Load every named tier file into tokenized examples.

    Returns (examples, per-tier counts). Missing files, malformed
    lines, and records without id or summary are DataErrors; a file
    with zero rows is allowed as long as some tier contributes data.
    """
    examples: list[Example] = []
    counts: dict[str, int] = {}
    for tier in tiers:
        path = data_dir / f"{tier}.jsonl"
        if not path.is_file():
            raise DataError(f"tier file not found: {path}")
        n = 0
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
                if not isinstance(obj, dict) or "id" not in obj or "summary" not in obj:
                    raise DataError(f"{path}:{lineno}: record needs id and summary fields")
                summary = str(obj["summary"])
                source = str(obj["document"]) if obj.get("document") else summary
                examples.append(to_example(str(obj["id"]), source, summary, doc_trunc, summary_trunc))
                n += 1
        counts[tier] = n
    if not examples:
        raise DataError(f"no training examples in tiers {tiers} under {data_dir}")
    return examples, counts


def collate(batch: list[Example], device: str = "cpu") -> dict[str, torch.Tensor]:
    """Pad a batch to rectangular tensors; labels pad with the ignore id."""
    s = max(len(ex.src) for ex in batch)
    t = max(len(ex.tgt_in) for ex in batch)
    src = torch.full((len(batch), s), PAD, dtype=torch.long)
    tgt_in = torch.full((len(batch), t), PAD, dtype=torch.long)
    labels = torch.full((len(batch), t), PAD, dtype=torch.long)
    for i, ex in enumerate(batch):
        src[i, : len(ex.src)] = torch.tensor(ex.src, dtype=torch.long)
        tgt_in[i, : len(ex.tgt_in)] = torch.tensor(ex.tgt_in, dtype=torch.long)
        labels[i, : len(ex.labels)] = torch.tensor(ex.labels, dtype=torch.long)
    return {
        "src": src.to(device),
        "tgt_in": tgt_in.to(device),
        "labels": labels.to(device),
        "src_pad": src.eq(PAD).to(device),
        "tgt_pad": tgt_in.eq(PAD).to(device),
    }


class StepSampler:
    """Deterministic shuffled cycling over example indices.

    Each optimizer step draws exactly batch_size indices; the pool is
    reshuffled whenever it runs dry, so small datasets repeat within a
    step and large ones spread across steps.
    """

    def __init__(self, n_examples: int, batch_size: int, seed: int):
        if n_examples < 1:
            raise DataError("cannot sample from an empty dataset")
        self.n = n_examples
        self.batch_size = batch_size
        self.rng = random.Random(seed)
        self.queue: list[int] = []

    def next_batch(self) -> list[int]:
        out: list[int] = []
        while len(out) < self.batch_size:
            if not self.queue:
                self.queue = list(range(self.n))
                self.rng.shuffle(self.queue)
            out.append(self.queue.pop())
        return out


def total_steps(epochs: int, n_examples: int, batch_size: int, max_steps: int | None) -> int:
    """Optimizer steps for the run: epochs times steps-per-epoch, or the override."""
    if max_steps is not None:
        return max_steps
    return epochs * max(1, math.ceil(n_examples / batch_size))
