"""Single-stage training loop behind the trainer CLI contract.

One invocation trains one manifest stage and leaves four artifacts in
the out directory: checkpoint.pt, checkpoint.digest, loss_curve.json
(a list of {step, loss} objects), and train_meta.json recording the
init lineage so a later stage's handoff can be verified from files
alone. Runs are deterministic for a fixed manifest, init, and machine:
the manifest seed drives both weight init and data order, and the
model uses no dropout.
"""

import hashlib
import json
import logging
import time
from dataclasses import dataclass, fields
from pathlib import Path

import torch
from torch.nn import functional as F

from .data import Example, StepSampler, collate, load_manifest, load_tier_records, resolve_data_dir, total_steps
from .errors import CheckpointError, ConfigError
from .model import DIGEST_FILE, PAD, TinySeq2Seq, load_checkpoint, param_count, save_checkpoint, state_digest

logger = logging.getLogger(__name__)

LOSS_CURVE_FILE = "loss_curve.json"
META_FILE = "train_meta.json"
ERROR_FILE = "error.json"


@dataclass(frozen=True)
class TrainerConfig:
    """Knobs that are the trainer's own, not the manifest's.

    per_device_batch times the derived accumulation factor always
    equals the manifest batch_size; max_steps overrides the epoch
    count for smoke runs. pretrained_path, when set, is the checkpoint
    loaded for init "pretrained"; otherwise that init means a fresh
    seeded random model.
    """

    per_device_batch: int = 8
    max_steps: int | None = None
    device: str = "cpu"
    pretrained_path: str | None = None
    d_model: int = 64
    n_heads: int = 4
    enc_layers: int = 2
    dec_layers: int = 2
    ff_dim: int = 128

    def __post_init__(self):
        if self.per_device_batch < 1:
            raise ConfigError(f"per_device_batch must be >= 1, got {self.per_device_batch}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        for name in ("d_model", "n_heads", "enc_layers", "dec_layers", "ff_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> TrainerConfig:
    """Build a TrainerConfig from an optional JSON file plus flag overrides."""
    known = {f.name for f in fields(TrainerConfig)}
    merged: dict = {}
    if path is not None:
        try:
            obj = json.loads(Path(path).read_text("utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged.update(obj)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return TrainerConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"bad trainer config: {exc}") from exc


def resolve_batching(config: TrainerConfig, batch_size: int) -> tuple[int, int]:
    """Per-device batch and accumulation whose product is exactly batch_size."""
    per_device = min(config.per_device_batch, batch_size)
    if batch_size % per_device:
        raise ConfigError(
            f"manifest batch_size {batch_size} is not divisible by per-device batch {per_device}"
        )
    return per_device, batch_size // per_device


def initialize(init: str, config: TrainerConfig, seed: int) -> tuple[TinySeq2Seq, str | None, str]:
    """Resolve the --init argument to a model.

    "pretrained" loads config.pretrained_path when set and otherwise
    builds a seeded random model; anything else is a directory written
    by a previous stage, whose recorded digest must still match its
    weights. Returns (model, init digest or None, init kind).
    """
    if init == "pretrained":
        if config.pretrained_path:
            model = load_checkpoint(config.pretrained_path)
            return model, state_digest(model.state_dict()), "pretrained-checkpoint"
        torch.manual_seed(seed)
        model = TinySeq2Seq(
            d_model=config.d_model,
            n_heads=config.n_heads,
            enc_layers=config.enc_layers,
            dec_layers=config.dec_layers,
            ff_dim=config.ff_dim,
        )
        return model, None, "random-init"

    ckpt_dir = Path(init)
    model = load_checkpoint(ckpt_dir)
    digest = state_digest(model.state_dict())
    recorded = ckpt_dir / DIGEST_FILE
    if recorded.is_file():
        want = recorded.read_text("utf-8").strip()
        if want != digest:
            raise CheckpointError(
                f"checkpoint at {ckpt_dir} does not match its recorded digest "
                f"(recorded {want[:12]}..., actual {digest[:12]}...)"
            )
    return model, digest, "chained"


def batch_loss(
    model: TinySeq2Seq, examples: list[Example], per_device: int, total_tokens: int, device: str
) -> tuple[torch.Tensor | None, float]:
    """Mean cross-entropy over the batch, accumulated in per-device chunks.

    Each chunk's summed loss is divided by the batch-wide label count
    before backward, so gradients match a single full-batch pass no
    matter how the chunks split. Returns the last chunk's graph-bearing
    loss (callers in no_grad contexts ignore it) and the float total.
    """
    total = 0.0
    loss = None
    for lo in range(0, len(examples), per_device):
        tensors = collate(examples[lo : lo + per_device], device)
        logits = model(tensors["src"], tensors["tgt_in"], tensors["src_pad"], tensors["tgt_pad"])
        loss = F.cross_entropy(
            logits.transpose(1, 2), tensors["labels"], ignore_index=PAD, reduction="sum"
        ) / total_tokens
        if loss.requires_grad:
            loss.backward()
        total += float(loss.detach())
    return loss, total


def train_stage(
    manifest_path: str | Path, init: str, out_dir: str | Path, config: TrainerConfig | None = None
) -> dict:
    """Train one stage and write its artifacts; returns the run summary."""
    config = config or TrainerConfig()
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = load_manifest(manifest_path)
    data_dir = resolve_data_dir(manifest_path, manifest)
    examples, tier_counts = load_tier_records(
        data_dir, manifest["data_tiers"], manifest["doc_trunc"], manifest["summary_trunc"]
    )
    per_device, accumulation = resolve_batching(config, manifest["batch_size"])
    model, init_digest, init_kind = initialize(init, config, manifest["seed"])
    model = model.to(config.device)
    model.train()

    steps = total_steps(manifest["epochs"], len(examples), manifest["batch_size"], config.max_steps)
    sampler = StepSampler(len(examples), manifest["batch_size"], manifest["seed"])
    optimizer = torch.optim.Adam(model.parameters(), lr=manifest["learning_rate"])
    logger.info(
        "stage %s: %d examples %s, %d steps, batch %d = %d x %d, init %s",
        manifest["stage"], len(examples), tier_counts, steps,
        manifest["batch_size"], per_device, accumulation, init_kind,
    )

    start = time.monotonic()
    curve: list[dict] = []
    for step in range(1, steps + 1):
        batch = [examples[i] for i in sampler.next_batch()]
        total_tokens = sum(len(ex.labels) for ex in batch)
        optimizer.zero_grad()
        _, loss_value = batch_loss(model, batch, per_device, total_tokens, config.device)
        optimizer.step()
        curve.append({"step": step, "loss": loss_value})
        if step == 1 or step == steps or step % 10 == 0:
            logger.info("step %d/%d loss %.4f", step, steps, loss_value)

    model.eval()
    digest = save_checkpoint(model, out_dir)
    _write_json(out_dir / LOSS_CURVE_FILE, curve)
    meta = {
        "stage": manifest["stage"],
        "data_tiers": manifest["data_tiers"],
        "tier_counts": tier_counts,
        "init": init,
        "init_kind": init_kind,
        "init_digest": init_digest,
        "manifest_sha256": hashlib.sha256(manifest_path.read_bytes()).hexdigest(),
        "steps": steps,
        "param_count": param_count(model),
        "final_loss": curve[-1]["loss"],
        "checkpoint_digest": digest,
        "wall_time_s": round(time.monotonic() - start, 3),
    }
    _write_json(out_dir / META_FILE, meta)
    stale = out_dir / ERROR_FILE
    if stale.exists():
        stale.unlink()
    return meta


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
