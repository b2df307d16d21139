"""Regenerate the frozen expectations under tests/data/.

Run from the repository root after an intentional behavior change:

    python3 scripts/make_goldens.py

Two files are produced:
  - golden_ed_mini.jsonl: per-document extraction choices on the bundled
    corpus, computed with the brute-force oracle from tests/oracles.py
    (explicit complement concatenation), not the library's fast path.
  - golden_pipeline_digests.json: the digests.json emitted by
    `sumpyramid pipeline --corpus mini --hd mini --seed 1`.
"""

from __future__ import annotations

import json
import sys
import tempfile
from importlib import resources
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import oracle_extract

from sumpyramid.cli import main as cli_main
from sumpyramid.records import iter_corpus
from sumpyramid.text import make_document, truncate_document

DATA_DIR = ROOT / "tests" / "data"
PIPELINE_SEED = 1
DOC_TRUNC = 1024


def ed_golden() -> Path:
    corpus = str(resources.files("sumpyramid.data").joinpath("mini/corpus.jsonl"))
    out_path = DATA_DIR / "golden_ed_mini.jsonl"
    with open(out_path, "w", encoding="utf-8") as fh:
        for doc_id, text in iter_corpus(corpus):
            doc = truncate_document(make_document(doc_id, text), DOC_TRUNC)
            token_lists = [s.tokens for s in doc.sentences]
            row = {"id": doc_id}
            for variant in ("f1", "recall"):
                index, score = oracle_extract(token_lists, variant)
                row[f"{variant}_index"] = index
                row[f"{variant}_score"] = score
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return out_path


def pipeline_golden() -> Path:
    out_path = DATA_DIR / "golden_pipeline_digests.json"
    with tempfile.TemporaryDirectory() as tmp:
        run_dir = Path(tmp) / "run"
        status = cli_main(
            [
                "--log-level", "WARNING",
                "pipeline",
                "--corpus", "mini",
                "--hd", "mini",
                "--out", str(run_dir),
                "--seed", str(PIPELINE_SEED),
            ]
        )
        if status != 0:
            raise SystemExit(f"pipeline run failed with exit code {status}")
        out_path.write_bytes((run_dir / "digests.json").read_bytes())
    return out_path


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for path in (ed_golden(), pipeline_golden()):
        print(f"wrote {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
