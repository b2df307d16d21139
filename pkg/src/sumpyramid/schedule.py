"""Two-stage fine-tuning plans and trainer sequencing.

Stage one trains on the synthetic tiers (ED + AD), stage two continues
from that checkpoint on the human tier. The trainer itself is an
external command; this module only emits declarative stage manifests,
invokes the command per stage, and keeps a resumable ledger.

Trainer contract: ``trainer --manifest <path> --init <ckpt|pretrained>
--out <dir>`` exits 0 and writes ``checkpoint.digest`` in the out dir.
``--init`` receives the previous stage's out dir (or "pretrained").
"""

from __future__ import annotations

import json
import logging
import os
import subprocess
import time
from dataclasses import asdict, dataclass
from pathlib import Path, PurePosixPath
from typing import Sequence

from .exceptions import CheckpointMissing, MissingTier, TrainerFailure
from .jsonl import digest_obj, read_json, write_json
from .validation import check_positive_int

logger = logging.getLogger(__name__)

MODES = ("hft", "hd_only", "hybrid")

GENERIC_DEFAULTS = {"epochs": 3, "learning_rate": 5e-5, "batch_size": 128}
PERSONALIZED_DEFAULTS = {"epochs": 20, "learning_rate": 5e-5, "batch_size": 128}
DOC_TRUNC = 1024
SUMMARY_TRUNC = 128


@dataclass(frozen=True)
class StageManifest:
    stage: str
    data_tiers: tuple[str, ...]
    epochs: int
    learning_rate: float
    batch_size: int
    init_from: str
    doc_trunc: int = DOC_TRUNC
    summary_trunc: int = SUMMARY_TRUNC
    seed: int = 0
    data_dir: str = "."

    def __post_init__(self):
        check_positive_int(self.epochs, "epochs")
        check_positive_int(self.batch_size, "batch_size")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.init_from not in ("pretrained", "previous_stage_checkpoint"):
            raise ValueError(f"unknown init_from {self.init_from!r}")
        if self.stage == "generic" and not set(self.data_tiers) <= {"ED", "AD"}:
            raise ValueError(f"generic stage tiers must be within ED/AD, got {self.data_tiers}")
        if self.stage == "personalized" and tuple(self.data_tiers) != ("HD",):
            raise ValueError(f"personalized stage trains on HD only, got {self.data_tiers}")

    def to_json(self) -> dict:
        obj = asdict(self)
        obj["data_tiers"] = list(self.data_tiers)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "StageManifest":
        return cls(
            stage=obj["stage"],
            data_tiers=tuple(obj["data_tiers"]),
            epochs=int(obj["epochs"]),
            learning_rate=float(obj["learning_rate"]),
            batch_size=int(obj["batch_size"]),
            init_from=obj["init_from"],
            doc_trunc=int(obj.get("doc_trunc", DOC_TRUNC)),
            summary_trunc=int(obj.get("summary_trunc", SUMMARY_TRUNC)),
            seed=int(obj.get("seed", 0)),
            data_dir=obj.get("data_dir", "."),
        )

    def digest(self) -> str:
        return digest_obj(self.to_json())


def plan(
    pyramid_dir: str | Path,
    out_dir: str | Path | None = None,
    mode: str = "hft",
    seed: int = 0,
    overrides: dict | None = None,
) -> list[StageManifest]:
    """Build stage manifests for a pyramid dataset.

    hft: generic (ED, AD) then personalized (HD).
    hd_only: one personalized stage initialized from the pretrained
        model (the no-synthetic-data baseline; the only plan in which a
        personalized stage does not chain from a generic checkpoint).
    hybrid: one generic-style stage mixing all three tiers.

    When out_dir is given, manifests are written there as
    stage_<i>_<name>.json with data_dir recorded relative to out_dir.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    overrides = overrides or {}
    pyramid_dir = Path(pyramid_dir)
    manifest = read_json(pyramid_dir / "manifest.json")
    counts = manifest["counts"]

    if out_dir is not None:
        data_dir = PurePosixPath(os.path.relpath(pyramid_dir, out_dir)).as_posix()
    else:
        data_dir = str(pyramid_dir)

    def needs(tier: str):
        if counts.get(tier, 0) <= 0:
            raise MissingTier(f"mode {mode!r} needs a nonempty {tier} tier")

    def build(stage: str, tiers: tuple[str, ...], defaults: dict, init_from: str) -> StageManifest:
        params = {**defaults, **overrides}
        return StageManifest(
            stage=stage,
            data_tiers=tiers,
            epochs=params["epochs"],
            learning_rate=params["learning_rate"],
            batch_size=params["batch_size"],
            init_from=init_from,
            doc_trunc=params.get("doc_trunc", DOC_TRUNC),
            summary_trunc=params.get("summary_trunc", SUMMARY_TRUNC),
            seed=seed,
            data_dir=data_dir,
        )

    if mode == "hft":
        needs("HD")
        if counts.get("ED", 0) <= 0 and counts.get("AD", 0) <= 0:
            raise MissingTier("hft mode needs a nonempty ED or AD tier")
        generic_tiers = tuple(t for t in ("ED", "AD") if counts.get(t, 0) > 0)
        stages = [
            build("generic", generic_tiers, GENERIC_DEFAULTS, "pretrained"),
            build("personalized", ("HD",), PERSONALIZED_DEFAULTS, "previous_stage_checkpoint"),
        ]
    elif mode == "hd_only":
        needs("HD")
        stages = [build("personalized", ("HD",), PERSONALIZED_DEFAULTS, "pretrained")]
    else:
        tiers = tuple(t for t in ("ED", "AD", "HD") if counts.get(t, 0) > 0)
        if not tiers:
            raise MissingTier("hybrid mode needs at least one nonempty tier")
        stages = [build("hybrid", tiers, GENERIC_DEFAULTS, "pretrained")]

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for i, stage in enumerate(stages, start=1):
            write_json(out / f"stage_{i}_{stage.stage}.json", stage.to_json())
    return stages


def _write_ledger(path: Path, entries: list[dict]) -> None:
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(entries, fh, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def read_checkpoint_digest(stage_out: Path) -> str:
    digest_path = stage_out / "checkpoint.digest"
    if not digest_path.is_file():
        raise CheckpointMissing(f"trainer wrote no checkpoint digest at {digest_path}")
    return digest_path.read_text("utf-8").strip()


def execute(
    manifest_paths: Sequence[str | Path],
    trainer_command: Sequence[str],
    out_dir: str | Path,
    resume: bool = False,
) -> list[dict]:
    """Run the trainer once per stage, in order, aborting on failure.

    The ledger (ledger.json under out_dir) records one entry per
    attempted stage and is rewritten atomically after each. With resume,
    a completed stage is skipped when its manifest digest and checkpoint
    digest both still match.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger_path = out_dir / "ledger.json"
    previous: list[dict] = json.loads(ledger_path.read_text("utf-8")) if (resume and ledger_path.is_file()) else []

    entries: list[dict] = []
    prev_stage_out: Path | None = None
    for i, mpath in enumerate(manifest_paths):
        mpath = Path(mpath)
        manifest = StageManifest.from_json(read_json(mpath))
        mdigest = manifest.digest()
        stage_out = out_dir / f"stage_{i + 1}_{manifest.stage}"

        if resume and i < len(previous):
            done = previous[i]
            if done.get("exit_status") == 0 and done.get("manifest_digest") == mdigest:
                try:
                    current = read_checkpoint_digest(stage_out)
                except CheckpointMissing:
                    current = None
                if current == done.get("checkpoint_digest"):
                    logger.info("stage %s already complete, skipping", manifest.stage)
                    entries.append(done)
                    prev_stage_out = stage_out
                    _write_ledger(ledger_path, entries)
                    continue

        if manifest.init_from == "previous_stage_checkpoint":
            if prev_stage_out is None:
                raise CheckpointMissing(
                    f"stage {manifest.stage!r} chains from a previous checkpoint but none exists"
                )
            init = str(prev_stage_out)
        else:
            init = "pretrained"

        stage_out.mkdir(parents=True, exist_ok=True)
        cmd = [*trainer_command, "--manifest", str(mpath), "--init", init, "--out", str(stage_out)]
        logger.info("running stage %s: %s", manifest.stage, " ".join(cmd))
        start = time.monotonic()
        proc = subprocess.run(cmd, capture_output=True, text=True)
        wall = time.monotonic() - start
        if proc.returncode != 0:
            entries.append(
                {
                    "stage": manifest.stage,
                    "manifest_digest": mdigest,
                    "checkpoint_digest": None,
                    "wall_time_s": round(wall, 3),
                    "exit_status": proc.returncode,
                }
            )
            _write_ledger(ledger_path, entries)
            logger.error("trainer stderr:\n%s", proc.stderr)
            raise TrainerFailure(manifest.stage, proc.returncode)
        entries.append(
            {
                "stage": manifest.stage,
                "manifest_digest": mdigest,
                "checkpoint_digest": read_checkpoint_digest(stage_out),
                "wall_time_s": round(wall, 3),
                "exit_status": 0,
            }
        )
        _write_ledger(ledger_path, entries)
        prev_stage_out = stage_out
    return entries
