import pytest

from sumpyramid.exceptions import BackendUnavailable, EmptyCompletion, TemplateError
from sumpyramid.generate import (
    DOC_TOKEN_LIMIT,
    MockBackend,
    PromptSpec,
    SummaryGenerator,
    derive_spec,
    render_prompt,
)
from sumpyramid.text import count_tokens


class FlakyBackend:
    """Fails a fixed number of times, then echoes."""

    name = "live"
    model = "flaky"
    temperature = 0.0

    def __init__(self, failures, by_id=()):
        self.failures = failures
        self.by_id = set(by_id)
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        if request.doc_id in self.by_id:
            raise RuntimeError("always down for this document")
        if self.failures > 0:
            self.failures -= 1
            raise RuntimeError("transient")
        return f"summary for {request.doc_id}"


class BlankBackend:
    name = "live"
    model = "blank"
    temperature = 0.0

    def complete(self, request):
        return "   "


def no_sleep(_):
    pass


class TestPromptSpec:
    def test_default_placeholders_present(self):
        spec = PromptSpec()
        assert "[sent num]" in spec.user_template
        assert "[word num]" in spec.user_template

    def test_missing_placeholder_rejected(self):
        with pytest.raises(TemplateError):
            PromptSpec(user_template="Summarize in [sent num] sentences.")

    def test_duplicate_placeholder_rejected(self):
        with pytest.raises(TemplateError):
            PromptSpec(
                user_template="[sent num] and [sent num] around [word num] words."
            )

    def test_derive_spec_rounds_reference_mean(self):
        spec = derive_spec(30.58, sent_num=2)
        assert spec.word_num == 31
        assert spec.sent_num == 2


class TestRenderPrompt:
    def test_substitution_and_layout(self):
        spec = PromptSpec(sent_num=2, word_num=50)
        system, user = render_prompt(spec, "A tiny article body.")
        assert user.endswith("in 2 sentences around 50 words.")
        assert user.startswith("A tiny article body.")
        assert "[sent num]" not in user and "[word num]" not in user

    def test_system_prompt_verbatim(self):
        system, _ = render_prompt(PromptSpec(), "text")
        assert system == (
            "Generate a concise and coherent summary towards the given article "
            "and don't generate anything else. Make sure the summary is clear, "
            "informative, and well-structured."
        )

    def test_user_template_verbatim(self):
        spec = PromptSpec(sent_num=3, word_num=64)
        _, user = render_prompt(spec, "body")
        assert user == "body\n\nSummarize the article in 3 sentences around 64 words."

    def test_long_document_truncated_to_limit(self):
        words = " ".join(f"w{i}" for i in range(3000))
        spec = PromptSpec(sent_num=1, word_num=10)
        _, user = render_prompt(spec, words)
        instruction = "Summarize the article in 1 sentences around 10 words."
        assert user.endswith("\n\n" + instruction)
        doc_part = user[: -len("\n\n" + instruction)]
        assert count_tokens(doc_part) == DOC_TOKEN_LIMIT


class TestGenerate:
    def test_mock_determinism(self):
        doc = "The northern harbor reopened after months of review. Crews rebuilt the canal."
        first = SummaryGenerator(PromptSpec(), MockBackend(seed=5)).generate("d", doc)
        second = SummaryGenerator(PromptSpec(), MockBackend(seed=5)).generate("d", doc)
        assert first.summary == second.summary
        assert first.prompt_hash == second.prompt_hash
        different_seed = SummaryGenerator(PromptSpec(), MockBackend(seed=6)).generate("d", doc)
        assert different_seed.prompt_hash == first.prompt_hash

    def test_cache_hit_skips_backend(self, tmp_path):
        backend = FlakyBackend(failures=0)
        gen = SummaryGenerator(PromptSpec(), backend, cache_dir=tmp_path / "cache")
        first = gen.generate("d", "Some article text.")
        assert first.backend == "live"
        assert backend.calls == 1
        second = gen.generate("d", "Some article text.")
        assert second.backend == "cache"
        assert second.attempts == first.attempts
        assert backend.calls == 1

    def test_cache_shared_across_instances(self, tmp_path):
        cache = tmp_path / "cache"
        SummaryGenerator(PromptSpec(), FlakyBackend(0), cache_dir=cache).generate("d", "Text.")
        backend = FlakyBackend(0)
        again = SummaryGenerator(PromptSpec(), backend, cache_dir=cache).generate("d", "Text.")
        assert again.backend == "cache"
        assert backend.calls == 0

    def test_retry_accounting(self):
        backend = FlakyBackend(failures=2)
        gen = SummaryGenerator(PromptSpec(), backend, max_attempts=3, sleep=no_sleep)
        record = gen.generate("d", "Body text.")
        assert record.attempts == 3
        assert record.summary == "summary for d"

    def test_budget_exhaustion(self):
        backend = FlakyBackend(failures=99)
        gen = SummaryGenerator(PromptSpec(), backend, max_attempts=2, sleep=no_sleep)
        with pytest.raises(BackendUnavailable):
            gen.generate("d", "Body text.")
        assert backend.calls == 2

    def test_blank_completion_rejected(self):
        gen = SummaryGenerator(PromptSpec(), BlankBackend(), sleep=no_sleep)
        with pytest.raises(EmptyCompletion):
            gen.generate("d", "Body text.")


class TestGenerateCorpus:
    def _corpus(self, n):
        return [
            (f"d{i}", f"The c{i} council approved the new bridge. Crews start in May.")
            for i in range(n)
        ]

    def test_all_succeed(self):
        gen = SummaryGenerator(PromptSpec(word_num=8), MockBackend(seed=1))
        records, rejects = gen.generate_corpus(self._corpus(10))
        assert len(records) == 10 and rejects == []
        assert [r.id for r in records] == [f"d{i}" for i in range(10)]
        for rec in records:
            assert rec.tier == "AD"
            assert rec.token_len == count_tokens(rec.summary)
            assert rec.provenance["backend"] == "mock"

    def test_failures_partition_into_rejects(self):
        backend = FlakyBackend(failures=0, by_id={"d3"})
        gen = SummaryGenerator(PromptSpec(), backend, max_attempts=2, sleep=no_sleep)
        records, rejects = gen.generate_corpus(self._corpus(10))
        assert len(records) == 9
        assert [r["id"] for r in rejects] == ["d3"]
        assert "BackendUnavailable" in rejects[0]["error"]
        assert {r.id for r in records} | {r["id"] for r in rejects} == {
            f"d{i}" for i in range(10)
        }

    def test_bounded_concurrency_preserves_order(self):
        gen = SummaryGenerator(PromptSpec(word_num=8), MockBackend(seed=1))
        sequential, _ = gen.generate_corpus(self._corpus(8), max_in_flight=1)
        threaded, _ = gen.generate_corpus(self._corpus(8), max_in_flight=4)
        assert [r.to_json() for r in sequential] == [r.to_json() for r in threaded]
