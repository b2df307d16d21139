"""Generate the bundled 50-document mini corpus and its human tier.

Run from the repository root:

    python3 scripts/make_mini_corpus.py

Regenerating rewrites src/sumpyramid/data/mini/{corpus,hd}.jsonl; the
committed golden files depend on these bytes, so regenerate goldens
afterwards (scripts/make_goldens.py) if anything here changes.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "sumpyramid" / "data" / "mini"

SEED = 20240801

NOUNS = """council river market school harbor festival bridge museum election
factory forest railway hospital theater garden volcano glacier senate summit
reactor orchard stadium library airport village canal observatory mine port
tower plaza""".split()

VERBS = """approved delayed expanded flooded reopened inspected restored
announced suspended rebuilt funded evacuated surveyed celebrated upgraded
closed audited relocated modernized protected""".split()

ADJS = """local northern coastal historic crowded modern ancient rural busy
quiet flooded renovated disputed famous remote neighboring industrial
seasonal annual regional""".split()

NAMES = ["Rivera", "Chen", "Okafor", "Larsen", "Moreau", "Tanaka", "Silva", "Novak"]
TITLES = ["Dr.", "Mr.", "Mrs.", "Prof."]

TAILS = [
    "officials said on Friday",
    "according to the planning office",
    "despite earlier objections",
    "after months of review",
    "residents told reporters",
    "in a statement released today",
    "following the recent storms",
    "as part of the broader program",
]


def make_sentence(rng: random.Random, target_words: int, allow_name: bool = True) -> str:
    words = []
    while len(words) < target_words:
        clause = [
            "the",
            rng.choice(ADJS),
            rng.choice(NOUNS),
            rng.choice(VERBS),
            "the",
            rng.choice(ADJS),
            rng.choice(NOUNS),
        ]
        if rng.random() < 0.5:
            clause += rng.choice(TAILS).split()
        if allow_name and rng.random() < 0.2:
            clause += ["with", rng.choice(TITLES), rng.choice(NAMES)]
        words.extend(clause)
    text = " ".join(words[:target_words])
    text = text[0].upper() + text[1:]
    return text + rng.choice([".", ".", ".", "!", "?"])


def make_document_text(rng: random.Random, doc_index: int) -> str:
    n_sentences = rng.randint(4, 11)
    sentences = [make_sentence(rng, rng.randint(14, 32)) for _ in range(n_sentences)]
    if doc_index == 7:
        # one document whose lead repeats later content, a near-tie case
        sentences[0] = sentences[1]
    if doc_index == 19:
        sentences = sentences[:1]
    return " ".join(sentences)


def make_hd_summary(rng: random.Random) -> str:
    n_sentences = rng.randint(2, 3)
    return " ".join(make_sentence(rng, rng.randint(8, 13), allow_name=False) for _ in range(n_sentences))


def main() -> None:
    rng = random.Random(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    corpus = [
        {"id": f"doc{i:03d}", "document": make_document_text(rng, i)} for i in range(50)
    ]
    with open(OUT_DIR / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for rec in corpus:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=True))
            fh.write("\n")

    hd = [{"id": f"hd{i:03d}", "summary": make_hd_summary(rng)} for i in range(12)]
    with open(OUT_DIR / "hd.jsonl", "w", encoding="utf-8") as fh:
        for rec in hd:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=True))
            fh.write("\n")

    print(f"wrote {len(corpus)} corpus docs and {len(hd)} human records to {OUT_DIR}")


if __name__ == "__main__":
    main()
