"""Fixtures for trainer tests; builders live in trainer_helpers."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pyramid_trainer.cli import main as cli_main


@pytest.fixture
def run_cli():
    def run(argv):
        return cli_main([str(a) for a in argv])

    return run
