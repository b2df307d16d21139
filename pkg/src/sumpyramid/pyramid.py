"""Three-tier dataset assembly and bookkeeping.

ED and AD are synthesized from disjoint slices of the training corpus;
HD is always supplied by humans. This module owns the seeded split, the
on-disk layout ({tier}.jsonl + manifest.json + stats.json), per-tier
length statistics, and the subsampling knobs used for data-proportion
studies.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import EmptyCorpus, InvalidK, TierViolation, TokenizerMismatch
from .jsonl import digest_obj, read_json, sha256_file, write_json
from .records import TIERS, SummaryRecord, read_summary_records, write_summary_records
from .resample import exact_moments
from .text import DEFAULT_TOKENIZER
from .validation import check_ratio

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PyramidConfig:
    split_ratio: tuple[float, float] = (0.8, 0.2)
    seed: int = 0
    ad_fraction_tau: float | None = None
    ad_fraction_sigma: float | None = None

    def __post_init__(self):
        a, b = self.split_ratio
        check_ratio(a, "split_ratio[0]")
        check_ratio(b, "split_ratio[1]")
        if abs(a + b - 1.0) > 1e-9:
            raise ValueError(f"split_ratio must sum to 1, got {a} + {b}")
        if self.ad_fraction_tau is not None:
            check_ratio(self.ad_fraction_tau, "ad_fraction_tau")
        if self.ad_fraction_sigma is not None:
            check_ratio(self.ad_fraction_sigma, "ad_fraction_sigma")


def dedupe_corpus(corpus: Iterable[tuple[str, str]]) -> list[tuple[str, str]]:
    """Drop repeated document ids, keeping first occurrence."""
    seen: set[str] = set()
    out: list[tuple[str, str]] = []
    dropped = 0
    for doc_id, text in corpus:
        if doc_id in seen:
            dropped += 1
            continue
        seen.add(doc_id)
        out.append((doc_id, text))
    if dropped:
        logger.warning("dropped %d duplicate document ids before splitting", dropped)
    return out


def split_corpus(
    corpus: Iterable[tuple[str, str]], config: PyramidConfig
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Seeded shuffle then partition into (ed_source, ad_source)."""
    docs = dedupe_corpus(corpus)
    if not docs:
        raise EmptyCorpus("cannot split an empty corpus")
    rng = random.Random(config.seed)
    rng.shuffle(docs)
    n_ed = round(config.split_ratio[0] * len(docs))
    return docs[:n_ed], docs[n_ed:]


def subsample(records: Sequence[SummaryRecord], k: int, seed: int) -> list[SummaryRecord]:
    """Seeded uniform sample without replacement, original order kept."""
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= len(records):
        raise InvalidK(f"k must be in [1, {len(records)}], got {k!r}")
    indices = random.Random(seed).sample(range(len(records)), k)
    return [records[i] for i in sorted(indices)]


subsample_hd = subsample


def fixed_pool(
    ed: Sequence[SummaryRecord],
    ad: Sequence[SummaryRecord],
    tau: float,
    pool_size: int,
    seed: int,
) -> tuple[list[SummaryRecord], list[SummaryRecord]]:
    """Fixed-size synthetic pool with AD share tau, ED share 1 - tau."""
    check_ratio(tau, "tau")
    n_ad = round(tau * pool_size)
    n_ed = pool_size - n_ad
    ed_part = subsample(ed, n_ed, seed) if n_ed else []
    ad_part = subsample(ad, n_ad, seed + 1) if n_ad else []
    return ed_part, ad_part


def increasing_pool(
    ed: Sequence[SummaryRecord],
    ad: Sequence[SummaryRecord],
    sigma_fraction: float,
    seed: int,
) -> tuple[list[SummaryRecord], list[SummaryRecord]]:
    """All of ED plus a sigma_fraction-sized slice of AD on top."""
    check_ratio(sigma_fraction, "sigma_fraction")
    n_ad = round(sigma_fraction * len(ad))
    ad_part = subsample(ad, n_ad, seed) if n_ad else []
    return list(ed), ad_part


def assemble(
    ed: Sequence[SummaryRecord],
    ad: Sequence[SummaryRecord],
    hd: Sequence[SummaryRecord],
    out_dir: str | Path,
    config: PyramidConfig,
    tokenizer=None,
) -> dict:
    """Validate every record, write one JSONL per tier, and return the
    manifest (also written to manifest.json)."""
    tokenizer = tokenizer or DEFAULT_TOKENIZER
    tiers = {"ED": list(ed), "AD": list(ad), "HD": list(hd)}
    tokenizer_ids = {rec.tokenizer_id for recs in tiers.values() for rec in recs}
    if len(tokenizer_ids) > 1:
        raise TokenizerMismatch(f"records span multiple tokenizers: {sorted(tokenizer_ids)}")
    if tokenizer_ids and tokenizer_ids != {tokenizer.tokenizer_id}:
        raise TokenizerMismatch(
            f"records measured with {tokenizer_ids.pop()!r}, "
            f"validator uses {tokenizer.tokenizer_id!r}"
        )
    for tier, recs in tiers.items():
        for rec in recs:
            if rec.tier != tier:
                raise TierViolation(f"record {rec.id!r} tagged {rec.tier!r} in tier file {tier}")
            rec.validate(tokenizer)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    counts = {}
    file_digests = {}
    for tier, recs in tiers.items():
        path = out / f"{tier}.jsonl"
        counts[tier] = write_summary_records(path, recs)
        file_digests[tier] = sha256_file(path)
    manifest = {
        "counts": counts,
        "seed": config.seed,
        "config_digest": digest_obj(
            {
                "split_ratio": list(config.split_ratio),
                "seed": config.seed,
                "ad_fraction_tau": config.ad_fraction_tau,
                "ad_fraction_sigma": config.ad_fraction_sigma,
            }
        ),
        "tokenizer_id": tokenizer.tokenizer_id,
        "files": {tier: f"{tier}.jsonl" for tier in TIERS},
        "digests": file_digests,
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def load_pyramid(path: str | Path) -> dict[str, list[SummaryRecord]]:
    path = Path(path)
    manifest = read_json(path / "manifest.json")
    return {tier: read_summary_records(path / name) for tier, name in manifest["files"].items()}


def validate_manifest(path: str | Path) -> dict:
    """Check recorded counts and digests against the tier files."""
    path = Path(path)
    manifest = read_json(path / "manifest.json")
    for tier, name in manifest["files"].items():
        tier_path = path / name
        n = sum(1 for _ in open(tier_path, encoding="utf-8"))
        if n != manifest["counts"][tier]:
            raise TierViolation(f"{name}: manifest says {manifest['counts'][tier]} records, file has {n}")
        digest = sha256_file(tier_path)
        if digest != manifest["digests"][tier]:
            raise TierViolation(f"{name}: digest mismatch")
    return manifest


def tier_stats(records: Sequence[SummaryRecord]) -> dict:
    """Count, mean, and sample std of token_len; moments are null when
    too few records exist to compute them."""
    lengths = [rec.token_len for rec in records]
    if not lengths:
        return {"count": 0, "mean": None, "std": None}
    if len(lengths) == 1:
        return {"count": 1, "mean": float(lengths[0]), "std": None}
    mean, var = exact_moments(lengths)
    return {"count": len(lengths), "mean": float(mean), "std": math.sqrt(var)}


def pyramid_stats(tiers: dict[str, Sequence[SummaryRecord]]) -> dict:
    return {tier: tier_stats(tiers.get(tier, [])) for tier in TIERS}


def format_stats_table(stats: dict) -> str:
    lines = [f"{'Tier':<6}{'Samples':>10}  {'Length Mean±Std':>18}"]
    for tier in TIERS:
        row = stats.get(tier, {"count": 0, "mean": None, "std": None})
        if row["mean"] is None:
            shape = "-"
        elif row["std"] is None:
            shape = f"{row['mean']:.1f}"
        else:
            shape = f"{row['mean']:.1f}±{row['std']:.1f}"
        lines.append(f"{tier:<6}{row['count']:>10}  {shape:>18}")
    return "\n".join(lines)
