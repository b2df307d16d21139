"""Desk-scale trainer behind the stage-manifest contract.

Consumes a stage manifest plus tier JSONL files, fine-tunes a tiny
byte-level encoder-decoder, and writes a checkpoint, its SHA-256
digest, and a loss curve. A predict mode decodes summaries from a
saved checkpoint. Everything runs on CPU in minutes; the model is a
smoke-scale stand-in, not a quality summarizer.
"""

from .errors import CheckpointError, ConfigError, DataError, SchemaError, TrainerError
from .model import TinySeq2Seq, param_count, state_digest
from .train import TrainerConfig, train_stage

__version__ = "0.1.0"

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DataError",
    "SchemaError",
    "TrainerError",
    "TinySeq2Seq",
    "TrainerConfig",
    "param_count",
    "state_digest",
    "train_stage",
    "__version__",
]
