import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sumpyramid.cli import main as cli_main


@pytest.fixture
def run_cli():
    """Invoke the CLI in-process; returns the exit code."""

    def run(*argv):
        return cli_main([str(a) for a in argv])

    return run


@pytest.fixture
def write_jsonl_file(tmp_path):
    counter = {"n": 0}

    def write(records, name=None):
        counter["n"] += 1
        path = tmp_path / (name or f"records_{counter['n']}.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return path

    return write


@pytest.fixture(scope="session")
def mini_corpus_path():
    from importlib import resources

    return str(resources.files("sumpyramid.data").joinpath("mini/corpus.jsonl"))


@pytest.fixture(scope="session")
def mini_hd_path():
    from importlib import resources

    return str(resources.files("sumpyramid.data").joinpath("mini/hd.jsonl"))
