"""Command line honoring the stage-trainer contract.

Train mode is the default so an orchestrator can invoke
``pyramid-trainer --manifest M --init <dir|pretrained> --out O`` and
get exit 0 with checkpoint.pt, checkpoint.digest, loss_curve.json, and
train_meta.json in the out directory. Any failure exits nonzero after
writing error.json there and printing the same JSON to stderr.
``pyramid-trainer predict`` decodes summaries from a checkpoint.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .decode import STRATEGIES, predict
from .errors import TrainerError
from .train import ERROR_FILE, load_config, train_stage

logger = logging.getLogger(__name__)


def _setup_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _error_payload(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def _report_failure(exc: Exception, out_dir: Path | None) -> None:
    payload = _error_payload(exc)
    line = json.dumps(payload, sort_keys=True)
    print(line, file=sys.stderr)
    if out_dir is not None:
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            with open(out_dir / ERROR_FILE, "w", encoding="utf-8") as fh:
                fh.write(line + "\n")
        except OSError:
            logger.error("could not write %s under %s", ERROR_FILE, out_dir)


def _train_main(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="pyramid-trainer",
        description="Train one manifest stage with a tiny byte-level encoder-decoder",
    )
    parser.add_argument("--manifest", required=True, help="stage manifest JSON")
    parser.add_argument("--init", required=True, help="'pretrained' or a previous stage's out dir")
    parser.add_argument("--out", required=True, help="directory for checkpoint and logs")
    parser.add_argument("--config", help="TrainerConfig JSON file")
    parser.add_argument("--per-device-batch", type=int, default=None)
    parser.add_argument("--max-steps", type=int, default=None, help="override the epoch-derived step count")
    parser.add_argument("--device", default=None)
    parser.add_argument("--pretrained-path", default=None, help="checkpoint used for --init pretrained")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)

    out_dir = Path(args.out)
    try:
        config = load_config(
            args.config,
            {
                "per_device_batch": args.per_device_batch,
                "max_steps": args.max_steps,
                "device": args.device,
                "pretrained_path": args.pretrained_path,
            },
        )
        meta = train_stage(args.manifest, args.init, out_dir, config)
    except TrainerError as exc:
        _report_failure(exc, out_dir)
        return 1
    except (RuntimeError, MemoryError, OSError) as exc:
        _report_failure(exc, out_dir)
        return 1
    print(
        json.dumps(
            {
                "stage": meta["stage"],
                "steps": meta["steps"],
                "final_loss": meta["final_loss"],
                "checkpoint_digest": meta["checkpoint_digest"],
            },
            sort_keys=True,
        )
    )
    return 0


def _predict_main(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(
        prog="pyramid-trainer predict",
        description="Decode one summary per document from a saved checkpoint",
    )
    parser.add_argument("--checkpoint", required=True, help="checkpoint file or stage out dir")
    parser.add_argument("--documents", required=True, help="JSONL with id and document fields")
    parser.add_argument("--out", required=True, help="output JSONL of id and summary")
    parser.add_argument("--strategy", choices=list(STRATEGIES), default="greedy")
    parser.add_argument("--beam-width", type=int, default=4)
    parser.add_argument("--max-len", type=int, default=64, help="summary length cap in bytes")
    parser.add_argument("--doc-limit", type=int, default=1024, help="document length cap in bytes")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)

    try:
        predict(
            args.checkpoint,
            args.documents,
            args.out,
            strategy=args.strategy,
            beam_width=args.beam_width,
            max_len=args.max_len,
            doc_limit=args.doc_limit,
        )
    except TrainerError as exc:
        _report_failure(exc, None)
        return 1
    except (RuntimeError, MemoryError, OSError) as exc:
        _report_failure(exc, None)
        return 1
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "predict":
        return _predict_main(argv[1:])
    return _train_main(argv)


if __name__ == "__main__":
    sys.exit(main())
