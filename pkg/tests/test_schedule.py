import json
import sys

import pytest

from trainer_stub import make_stub_trainer
from sumpyramid.exceptions import CheckpointMissing, MissingTier, TrainerFailure
from sumpyramid.jsonl import read_json, write_json
from sumpyramid.pyramid import PyramidConfig, assemble
from sumpyramid.records import SummaryRecord
from sumpyramid.schedule import (
    DOC_TRUNC,
    SUMMARY_TRUNC,
    StageManifest,
    execute,
    plan,
    read_checkpoint_digest,
)
from sumpyramid.text import DEFAULT_TOKENIZER


def rec(i, tier):
    summary = f"summary {tier} {i}"
    return SummaryRecord(
        id=f"{tier.lower()}{i}",
        summary=summary,
        tier=tier,
        token_len=len(DEFAULT_TOKENIZER.tokenize(summary)),
        tokenizer_id=DEFAULT_TOKENIZER.tokenizer_id,
    )


def make_pyramid(tmp_path, n_ed=4, n_ad=3, n_hd=2, name="pyr"):
    ed = [rec(i, "ED") for i in range(n_ed)]
    ad = [rec(i, "AD") for i in range(n_ad)]
    hd = [rec(i, "HD") for i in range(n_hd)]
    out = tmp_path / name
    assemble(ed, ad, hd, out, PyramidConfig())
    return out


class TestPlan:
    def test_two_stage_defaults(self, tmp_path):
        stages = plan(make_pyramid(tmp_path))
        assert [s.stage for s in stages] == ["generic", "personalized"]
        generic, personalized = stages
        assert generic.data_tiers == ("ED", "AD")
        assert (generic.epochs, generic.learning_rate, generic.batch_size) == (3, 5e-5, 128)
        assert generic.init_from == "pretrained"
        assert (generic.doc_trunc, generic.summary_trunc) == (DOC_TRUNC, SUMMARY_TRUNC)
        assert personalized.data_tiers == ("HD",)
        assert (personalized.epochs, personalized.learning_rate) == (20, 5e-5)
        assert personalized.init_from == "previous_stage_checkpoint"

    def test_human_only_baseline(self, tmp_path):
        stages = plan(make_pyramid(tmp_path), mode="hd_only")
        assert len(stages) == 1
        assert stages[0].stage == "personalized"
        assert stages[0].init_from == "pretrained"
        assert stages[0].epochs == 20

    def test_hybrid_single_stage(self, tmp_path):
        stages = plan(make_pyramid(tmp_path), mode="hybrid")
        assert len(stages) == 1
        assert stages[0].data_tiers == ("ED", "AD", "HD")
        assert stages[0].epochs == 3

    def test_generic_stage_skips_empty_synthetic_tier(self, tmp_path):
        stages = plan(make_pyramid(tmp_path, n_ad=0))
        assert stages[0].data_tiers == ("ED",)

    def test_missing_tiers(self, tmp_path):
        no_hd = make_pyramid(tmp_path, n_hd=0, name="no_hd")
        with pytest.raises(MissingTier):
            plan(no_hd)
        with pytest.raises(MissingTier):
            plan(no_hd, mode="hd_only")
        no_synth = make_pyramid(tmp_path, n_ed=0, n_ad=0, name="no_synth")
        with pytest.raises(MissingTier):
            plan(no_synth)

    def test_unknown_mode(self, tmp_path):
        with pytest.raises(ValueError):
            plan(make_pyramid(tmp_path), mode="warmup")

    def test_overrides(self, tmp_path):
        stages = plan(
            make_pyramid(tmp_path),
            overrides={"epochs": 2, "learning_rate": 1e-4, "batch_size": 8},
        )
        for stage in stages:
            assert (stage.epochs, stage.learning_rate, stage.batch_size) == (2, 1e-4, 8)

    def test_written_files_and_relative_data_dir(self, tmp_path):
        pyr = make_pyramid(tmp_path)
        out = tmp_path / "plan"
        plan(pyr, out_dir=out, seed=11)
        files = sorted(p.name for p in out.glob("stage_*.json"))
        assert files == ["stage_1_generic.json", "stage_2_personalized.json"]
        obj = read_json(out / "stage_1_generic.json")
        assert obj["data_dir"] == "../pyr"
        assert obj["seed"] == 11
        assert (out / ".." / "pyr" / "manifest.json").resolve().exists()

    def test_written_manifests_are_stable(self, tmp_path):
        pyr = make_pyramid(tmp_path)
        plan(pyr, out_dir=tmp_path / "a")
        plan(pyr, out_dir=tmp_path / "b")
        assert (tmp_path / "a" / "stage_2_personalized.json").read_bytes() == (
            tmp_path / "b" / "stage_2_personalized.json"
        ).read_bytes()


class TestStageManifest:
    def _manifest(self, **kw):
        base = dict(
            stage="generic",
            data_tiers=("ED", "AD"),
            epochs=3,
            learning_rate=5e-5,
            batch_size=128,
            init_from="pretrained",
        )
        base.update(kw)
        return StageManifest(**base)

    def test_round_trip(self):
        manifest = self._manifest(seed=4, data_dir="../pyr")
        again = StageManifest.from_json(manifest.to_json())
        assert again == manifest
        assert again.digest() == manifest.digest()

    def test_digest_tracks_content(self):
        assert self._manifest().digest() != self._manifest(epochs=4).digest()

    def test_generic_rejects_human_tier(self):
        with pytest.raises(ValueError):
            self._manifest(data_tiers=("ED", "HD"))

    def test_personalized_is_human_only(self):
        with pytest.raises(ValueError):
            self._manifest(stage="personalized", data_tiers=("ED",))
        StageManifest(
            stage="personalized",
            data_tiers=("HD",),
            epochs=20,
            learning_rate=5e-5,
            batch_size=128,
            init_from="previous_stage_checkpoint",
        )

    def test_invalid_scalars(self):
        with pytest.raises(ValueError):
            self._manifest(epochs=0)
        with pytest.raises(ValueError):
            self._manifest(learning_rate=0.0)
        with pytest.raises(ValueError):
            self._manifest(batch_size=-1)
        with pytest.raises(ValueError):
            self._manifest(init_from="scratch")


class TestExecute:
    def _planned(self, tmp_path):
        pyr = make_pyramid(tmp_path)
        out = tmp_path / "plan"
        plan(pyr, out_dir=out)
        return sorted(out.glob("stage_*.json"))

    def test_two_stage_chain(self, tmp_path):
        manifests = self._planned(tmp_path)
        stub = make_stub_trainer(tmp_path)
        run_dir = tmp_path / "run"
        entries = execute(manifests, [sys.executable, str(stub)], run_dir)

        assert [e["stage"] for e in entries] == ["generic", "personalized"]
        assert all(e["exit_status"] == 0 for e in entries)
        for i, entry in enumerate(entries, start=1):
            stage_out = run_dir / f"stage_{i}_{entry['stage']}"
            assert read_checkpoint_digest(stage_out) == entry["checkpoint_digest"]
        ledger = json.loads((run_dir / "ledger.json").read_text())
        assert ledger == entries

        calls = (tmp_path / "calls.log").read_text().splitlines()
        assert len(calls) == 2
        first_init = calls[0].split("|")[1]
        second_init = calls[1].split("|")[1]
        assert first_init == "pretrained"
        assert second_init == str(run_dir / "stage_1_generic")

    def test_failure_aborts_chain(self, tmp_path):
        manifests = self._planned(tmp_path)
        stub = make_stub_trainer(tmp_path, fail=True)
        run_dir = tmp_path / "run"
        with pytest.raises(TrainerFailure) as excinfo:
            execute(manifests, [sys.executable, str(stub)], run_dir)
        assert excinfo.value.stage == "generic"
        assert excinfo.value.exit_code == 3
        ledger = json.loads((run_dir / "ledger.json").read_text())
        assert len(ledger) == 1 and ledger[0]["exit_status"] == 3
        assert len((tmp_path / "calls.log").read_text().splitlines()) == 1

    def test_resume_skips_completed_stages(self, tmp_path):
        manifests = self._planned(tmp_path)
        stub = make_stub_trainer(tmp_path)
        run_dir = tmp_path / "run"
        first = execute(manifests, [sys.executable, str(stub)], run_dir)
        resumed = execute(manifests, [sys.executable, str(stub)], run_dir, resume=True)
        assert resumed == first
        assert len((tmp_path / "calls.log").read_text().splitlines()) == 2

    def test_resume_redoes_tampered_checkpoint(self, tmp_path):
        manifests = self._planned(tmp_path)
        stub = make_stub_trainer(tmp_path)
        run_dir = tmp_path / "run"
        execute(manifests, [sys.executable, str(stub)], run_dir)
        (run_dir / "stage_2_personalized" / "checkpoint.digest").write_text("0" * 64)
        execute(manifests, [sys.executable, str(stub)], run_dir, resume=True)
        calls = (tmp_path / "calls.log").read_text().splitlines()
        assert len(calls) == 3
        assert calls[-1].split("|")[0].endswith("stage_2_personalized.json")

    def test_resume_redoes_changed_manifest(self, tmp_path):
        manifests = self._planned(tmp_path)
        stub = make_stub_trainer(tmp_path)
        run_dir = tmp_path / "run"
        execute(manifests, [sys.executable, str(stub)], run_dir)
        obj = read_json(manifests[1])
        obj["epochs"] = 21
        write_json(manifests[1], obj)
        execute(manifests, [sys.executable, str(stub)], run_dir, resume=True)
        assert len((tmp_path / "calls.log").read_text().splitlines()) == 3

    def test_silent_trainer_caught(self, tmp_path):
        manifests = self._planned(tmp_path)
        silent = tmp_path / "silent.py"
        silent.write_text("import sys; sys.exit(0)\n", encoding="utf-8")
        with pytest.raises(CheckpointMissing):
            execute(manifests, [sys.executable, str(silent)], tmp_path / "run")

    def test_chained_stage_without_predecessor(self, tmp_path):
        manifests = self._planned(tmp_path)
        stub = make_stub_trainer(tmp_path)
        with pytest.raises(CheckpointMissing):
            execute(manifests[1:], [sys.executable, str(stub)], tmp_path / "run")
