"""Manifest parsing, tier loading, batching, and step accounting."""

import json

import pytest

from trainer_helpers import make_manifest, tier_rows, write_jsonl
from pyramid_trainer.data import (
    StepSampler,
    collate,
    load_manifest,
    load_tier_records,
    resolve_data_dir,
    to_example,
    total_steps,
)
from pyramid_trainer.errors import ConfigError, DataError, SchemaError
from pyramid_trainer.model import BOS, EOS, PAD
from pyramid_trainer.train import TrainerConfig, resolve_batching


class TestManifest:
    def test_round_trip_and_defaults(self, tmp_path):
        path = make_manifest(tmp_path / "m.json", epochs=3, batch_size=128)
        manifest = load_manifest(path)
        assert manifest["stage"] == "generic"
        assert manifest["data_tiers"] == ["ED"]
        assert manifest["epochs"] == 3
        assert manifest["batch_size"] == 128

    def test_missing_keys_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"stage": "generic"}), encoding="utf-8")
        with pytest.raises(SchemaError, match="missing keys"):
            load_manifest(path)

    def test_optional_fields_default(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(
            json.dumps(
                {
                    "stage": "personalized",
                    "data_tiers": ["HD"],
                    "epochs": 1,
                    "learning_rate": 0.001,
                    "batch_size": 2,
                    "init_from": "pretrained",
                }
            ),
            encoding="utf-8",
        )
        manifest = load_manifest(path)
        assert manifest["doc_trunc"] == 1024
        assert manifest["summary_trunc"] == 128
        assert manifest["seed"] == 0
        assert manifest["data_dir"] == "."

    @pytest.mark.parametrize(
        "bad",
        [
            {"epochs": 0},
            {"batch_size": 0},
            {"learning_rate": 0.0},
            {"learning_rate": -1e-5},
            {"init_from": "scratch"},
            {"data_tiers": []},
            {"data_tiers": "ED"},
            {"doc_trunc": 0},
            {"summary_trunc": -1},
        ],
    )
    def test_invalid_values_rejected(self, tmp_path, bad):
        path = make_manifest(tmp_path / "m.json", **bad)
        with pytest.raises(SchemaError):
            load_manifest(path)

    def test_not_json_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("epochs: 3", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_manifest(path)

    def test_missing_file_is_data_error(self, tmp_path):
        with pytest.raises(DataError):
            load_manifest(tmp_path / "nope.json")

    def test_data_dir_resolves_relative_to_manifest(self, tmp_path):
        plan = tmp_path / "plan"
        plan.mkdir()
        path = make_manifest(plan / "m.json", data_dir="../pyr")
        manifest = load_manifest(path)
        assert resolve_data_dir(path, manifest) == (tmp_path / "pyr").resolve()


class TestExamples:
    def test_truncation_respected(self):
        ex = to_example("d", "x" * 5000, "y " * 400, 1024, 128)
        assert len(ex.src) == 1024
        assert len(ex.tgt_in) == 128
        assert len(ex.labels) == 128
        assert ex.src[-1] == EOS
        assert ex.tgt_in[0] == BOS
        assert EOS not in ex.tgt_in

    def test_short_pair_markers(self):
        ex = to_example("d", "ab", "c", 64, 32)
        assert ex.src == (ord("a"), ord("b"), EOS)
        assert ex.tgt_in == (BOS, ord("c"))
        assert ex.labels == (ord("c"), EOS)
        assert len(ex.tgt_in) == len(ex.labels)

    def test_collate_pads_and_masks(self):
        batch = [to_example("a", "abcd", "xy", 64, 32), to_example("b", "a", "x", 64, 32)]
        tensors = collate(batch)
        assert tensors["src"].shape == (2, 5)
        assert tensors["src"][1, -1] == PAD
        assert tensors["src_pad"].tolist() == [[False] * 5, [False, False, True, True, True]]
        assert tensors["labels"][1, -1] == PAD
        assert tensors["tgt_pad"].shape == tensors["tgt_in"].shape


class TestTierLoading:
    def test_document_used_when_present(self, tmp_path):
        write_jsonl(
            tmp_path / "AD.jsonl",
            [{"id": "x", "summary": "short target", "document": "much longer source text"}],
        )
        examples, counts = load_tier_records(tmp_path, ["AD"], 128, 64)
        assert counts == {"AD": 1}
        assert bytes(examples[0].src[:-1]).decode() == "much longer source text"

    def test_summary_fallback_without_document(self, tmp_path):
        write_jsonl(tmp_path / "HD.jsonl", [{"id": "x", "summary": "only a summary"}])
        examples, _ = load_tier_records(tmp_path, ["HD"], 128, 64)
        assert bytes(examples[0].src[:-1]).decode() == "only a summary"

    def test_tiers_concatenate_in_order(self, tmp_path):
        write_jsonl(tmp_path / "ED.jsonl", tier_rows("ED", 3))
        write_jsonl(tmp_path / "AD.jsonl", tier_rows("AD", 2))
        examples, counts = load_tier_records(tmp_path, ["ED", "AD"], 128, 64)
        assert counts == {"ED": 3, "AD": 2}
        assert [ex.doc_id for ex in examples] == ["ed000", "ed001", "ed002", "ad000", "ad001"]

    def test_missing_tier_file(self, tmp_path):
        with pytest.raises(DataError, match="tier file not found"):
            load_tier_records(tmp_path, ["ED"], 128, 64)

    def test_malformed_line(self, tmp_path):
        (tmp_path / "ED.jsonl").write_text('{"id": "a", "summary": "ok"}\nnot json\n', encoding="utf-8")
        with pytest.raises(DataError, match="not valid JSON"):
            load_tier_records(tmp_path, ["ED"], 128, 64)

    def test_record_without_summary(self, tmp_path):
        write_jsonl(tmp_path / "ED.jsonl", [{"id": "a"}])
        with pytest.raises(DataError, match="id and summary"):
            load_tier_records(tmp_path, ["ED"], 128, 64)

    def test_blank_lines_skipped(self, tmp_path):
        (tmp_path / "ED.jsonl").write_text('{"id": "a", "summary": "ok"}\n\n\n', encoding="utf-8")
        examples, counts = load_tier_records(tmp_path, ["ED"], 128, 64)
        assert counts == {"ED": 1}
        assert len(examples) == 1

    def test_all_tiers_empty(self, tmp_path):
        (tmp_path / "ED.jsonl").write_text("", encoding="utf-8")
        with pytest.raises(DataError, match="no training examples"):
            load_tier_records(tmp_path, ["ED"], 128, 64)

    def test_one_empty_tier_tolerated(self, tmp_path):
        (tmp_path / "ED.jsonl").write_text("", encoding="utf-8")
        write_jsonl(tmp_path / "AD.jsonl", tier_rows("AD", 2))
        examples, counts = load_tier_records(tmp_path, ["ED", "AD"], 128, 64)
        assert counts == {"ED": 0, "AD": 2}
        assert len(examples) == 2


class TestBatching:
    def test_sampler_deterministic(self):
        a = StepSampler(10, 4, seed=3)
        b = StepSampler(10, 4, seed=3)
        assert [a.next_batch() for _ in range(5)] == [b.next_batch() for _ in range(5)]

    def test_sampler_covers_each_epoch(self):
        sampler = StepSampler(10, 5, seed=0)
        seen = sampler.next_batch() + sampler.next_batch()
        assert sorted(seen) == list(range(10))

    def test_sampler_wraps_small_datasets(self):
        sampler = StepSampler(3, 8, seed=0)
        batch = sampler.next_batch()
        assert len(batch) == 8
        assert set(batch) == {0, 1, 2}

    def test_total_steps(self):
        assert total_steps(3, 5, 2, None) == 9
        assert total_steps(3, 5, 2, 4) == 4
        assert total_steps(20, 12, 128, None) == 20
        assert total_steps(2, 0, 4, None) == 2

    def test_resolve_batching(self):
        assert resolve_batching(TrainerConfig(per_device_batch=8), 128) == (8, 16)
        assert resolve_batching(TrainerConfig(per_device_batch=8), 2) == (2, 1)
        with pytest.raises(ConfigError, match="not divisible"):
            resolve_batching(TrainerConfig(per_device_batch=4), 10)
