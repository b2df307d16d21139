import random

import pytest

from oracles import oracle_rouge_l, oracle_rouge_n
from sumpyramid.exceptions import InvalidN
from sumpyramid.metrics import rouge_l, rouge_n, rouge_suite


class TestRougeN:
    def test_identity(self):
        s = ["the", "cat", "sat"]
        score = rouge_n(s, s, 1)
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        score = rouge_n(["a", "b", "c"], ["x", "y", "z"], 1)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_two_thirds_unigram(self):
        score = rouge_n(["the", "cat", "sat"], ["the", "cat", "ran"], 1)
        assert score.precision == pytest.approx(2 / 3, abs=0)
        assert score.recall == pytest.approx(2 / 3, abs=0)
        assert score.f1 == pytest.approx(2 / 3, abs=1e-15)

    def test_one_third_bigram(self):
        cand = ["the", "cat", "sat", "on"]
        ref = ["the", "cat", "ran", "on"]
        score = rouge_n(cand, ref, 2)
        assert score.precision == pytest.approx(1 / 3, abs=0)
        assert score.recall == pytest.approx(1 / 3, abs=0)

    def test_clipping(self):
        # candidate repeats a token beyond its reference count
        score = rouge_n(["a", "a", "a"], ["a", "b"], 1)
        assert score.precision == pytest.approx(1 / 3)
        assert score.recall == pytest.approx(1 / 2)

    def test_empty_candidate(self):
        score = rouge_n([], ["a"], 1)
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_invalid_n(self):
        with pytest.raises(InvalidN):
            rouge_n(["a"], ["a"], 0)


class TestRougeL:
    def test_reordered(self):
        score = rouge_l(["a", "b", "c", "d"], ["a", "c", "b", "d"])
        assert score.precision == pytest.approx(3 / 4, abs=0)
        assert score.recall == pytest.approx(3 / 4, abs=0)

    def test_identity(self):
        score = rouge_l(["x", "y"], ["x", "y"])
        assert score.f1 == 1.0

    def test_empty_candidate(self):
        score = rouge_l([], ["a"])
        assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)


class TestRougeSuite:
    def test_identical_strings(self):
        suite = rouge_suite("the cat sat", "the cat sat")
        assert all(suite[k].f1 == 1.0 for k in ("R1", "R2", "RL"))

    def test_hand_case(self):
        suite = rouge_suite("the cat sat", "the cat ran")
        assert suite["R1"].f1 == pytest.approx(2 / 3, abs=1e-15)

    def test_empty_candidate(self):
        suite = rouge_suite("", "anything")
        assert all(suite[k].f1 == 0.0 for k in ("R1", "R2", "RL"))

    def test_stopword_flag(self):
        full = rouge_suite("the cat", "the dog")
        filtered = rouge_suite("the cat", "the dog", remove_stopwords=True)
        assert full["R1"].f1 > 0.0
        assert filtered["R1"].f1 == 0.0

    def test_stem_flag(self):
        suite = rouge_suite("walked", "walks", stem=True)
        assert suite["R1"].f1 == 1.0


class TestProperties:
    def test_f1_symmetry(self):
        rng = random.Random(42)
        for _ in range(300):
            a = [rng.choice("abcdef") for _ in range(rng.randint(0, 12))]
            b = [rng.choice("abcdef") for _ in range(rng.randint(0, 12))]
            n = rng.randint(1, 3)
            fwd, rev = rouge_n(a, b, n), rouge_n(b, a, n)
            assert fwd.f1 == pytest.approx(rev.f1, abs=1e-15)
            assert fwd.precision == rev.recall
            lfwd, lrev = rouge_l(a, b), rouge_l(b, a)
            assert lfwd.f1 == pytest.approx(lrev.f1, abs=1e-15)

    def test_recall_monotone_in_matching_append(self):
        rng = random.Random(43)
        for _ in range(200):
            ref = [rng.choice("abcd") for _ in range(rng.randint(1, 10))]
            cand = [rng.choice("abcd") for _ in range(rng.randint(0, 10))]
            before = rouge_n(cand, ref, 1).recall
            after = rouge_n(cand + [rng.choice(ref)], ref, 1).recall
            assert after >= before

    def test_bounds(self):
        rng = random.Random(44)
        for _ in range(200):
            a = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
            b = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
            for score in (rouge_n(a, b, 1), rouge_n(a, b, 2), rouge_l(a, b)):
                for value in (score.precision, score.recall, score.f1):
                    assert 0.0 <= value <= 1.0

    def test_oracle_agreement_sample(self):
        rng = random.Random(45)
        for _ in range(200):
            a = [str(rng.randint(0, 19)) for _ in range(rng.randint(0, 30))]
            b = [str(rng.randint(0, 19)) for _ in range(rng.randint(0, 30))]
            n = rng.randint(1, 3)
            mine = rouge_n(a, b, n)
            p, r, f1 = oracle_rouge_n(a, b, n)
            assert mine.precision == pytest.approx(p, abs=1e-12)
            assert mine.recall == pytest.approx(r, abs=1e-12)
            assert mine.f1 == pytest.approx(f1, abs=1e-12)
            lmine = rouge_l(a, b)
            lp, lr, lf1 = oracle_rouge_l(a, b)
            assert lmine.precision == pytest.approx(lp, abs=1e-12)
            assert lmine.recall == pytest.approx(lr, abs=1e-12)
            assert lmine.f1 == pytest.approx(lf1, abs=1e-12)
