"""Command-line entry point.

One subcommand per pipeline phase plus an umbrella ``pipeline`` command
that runs the whole corpus-construction sequence into a single run
directory. Exit codes: 0 success, 1 domain failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import shlex
import sys
from importlib import resources
from pathlib import Path

from . import evaluate, generate, infotheory, pyramid, resample, schedule
from .exceptions import SumPyramidError
from .extract import GapSentenceExtractor
from .jsonl import digest_obj, read_jsonl, sha256_file, write_json, write_jsonl
from .records import SummaryRecord, iter_corpus, read_summary_records, write_summary_records
from .text import get_tokenizer

logger = logging.getLogger("sumpyramid")


def _bundled(name: str) -> str:
    return str(resources.files("sumpyramid.data").joinpath(f"mini/{name}"))


def _resolve_corpus(value: str) -> str:
    return _bundled("corpus.jsonl") if value == "mini" else value


def _resolve_hd(value: str) -> str:
    return _bundled("hd.jsonl") if value == "mini" else value


def _tokenizer(args):
    return get_tokenizer(args.tokenizer, getattr(args, "vocab", None))


def _emit(args, obj: dict, table: str) -> None:
    if getattr(args, "format", "table") == "json":
        print(json.dumps(obj, sort_keys=True, indent=2))
    else:
        print(table)


def load_hd_records(path: str | Path, tokenizer) -> list[SummaryRecord]:
    """Read human summaries as HD records; raw {"id","summary"} lines are
    coerced, measured lines are taken as-is."""
    out = []
    for obj in read_jsonl(path):
        if "tier" in obj:
            rec = SummaryRecord.from_json(obj)
        else:
            if "summary" not in obj or "id" not in obj:
                raise SumPyramidError(f"{path}: human records need 'id' and 'summary'")
            rec = SummaryRecord(
                id=str(obj["id"]),
                summary=str(obj["summary"]),
                tier="HD",
                token_len=len(tokenizer.tokenize(str(obj["summary"]))),
                tokenizer_id=tokenizer.tokenizer_id,
                document=obj.get("document"),
            )
        out.append(rec)
    return out


def hd_lengths(records: list[SummaryRecord]) -> list[int]:
    return [rec.token_len for rec in records]


# --- subcommand handlers ----------------------------------------------------


def cmd_build_ed(args) -> int:
    tokenizer = _tokenizer(args)
    extractor = GapSentenceExtractor(
        variant=args.variant, doc_trunc=args.doc_trunc, tokenizer=tokenizer
    )
    records = extractor.extract_corpus(iter_corpus(_resolve_corpus(args.corpus)))
    n = write_summary_records(args.out, records)
    logger.info("wrote %d ED records to %s", n, args.out)
    return 0


def _make_backend(args, tokenizer):
    if args.backend == "mock":
        return generate.MockBackend(seed=args.seed, tokenizer=tokenizer)
    cfg = {}
    if args.backend_config:
        cfg = _load_config_file(args.backend_config)
    endpoint = cfg.get("endpoint", args.endpoint)
    if not endpoint:
        raise SumPyramidError("live backend needs an endpoint (flag or config file)")
    return generate.HttpBackend(
        endpoint=endpoint,
        model=cfg.get("model", args.model),
        temperature=float(cfg.get("temperature", generate.DEFAULT_TEMPERATURE)),
        api_key_env=cfg.get("api_key_env"),
        timeout=float(cfg.get("timeout", 60.0)),
    )


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text("utf-8")
    if path.endswith(".json"):
        return json.loads(text)
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text)


def _word_num(args, tokenizer) -> int:
    if args.word_num is not None:
        return args.word_num
    if args.hd is not None:
        lengths = hd_lengths(load_hd_records(_resolve_hd(args.hd), tokenizer))
        mean, _ = resample.exact_moments(lengths)
        return max(1, round(float(mean)))
    return 64


def cmd_build_ad(args) -> int:
    tokenizer = _tokenizer(args)
    spec = generate.PromptSpec(sent_num=args.sent_num, word_num=_word_num(args, tokenizer))
    gen = generate.SummaryGenerator(
        spec=spec,
        backend=_make_backend(args, tokenizer),
        cache_dir=args.cache_dir,
        max_attempts=args.max_attempts,
        tokenizer=tokenizer,
    )
    corpus = list(iter_corpus(_resolve_corpus(args.corpus)))
    records, rejects = gen.generate_corpus(corpus, max_in_flight=args.max_in_flight)
    n = write_summary_records(args.out, records)
    reject_path = args.reject_file or str(Path(args.out).with_suffix(".rejects.jsonl"))
    write_jsonl(reject_path, rejects)
    logger.info("wrote %d AD records to %s (%d rejects)", n, args.out, len(rejects))
    return 0


def cmd_fit_length(args) -> int:
    tokenizer = _tokenizer(args)
    records = load_hd_records(_resolve_hd(args.hd), tokenizer)
    model = resample.fit_length_model(hd_lengths(records), tokenizer.tokenizer_id)
    model.save(args.out)
    logger.info(
        "fitted length model on %d summaries: mu=%.3f sigma=%.3f interval=[%.3f, %.3f]",
        model.sample_count, model.mu, model.sigma, model.lower, model.upper,
    )
    return 0


def cmd_resample(args) -> int:
    model = resample.LengthModel.load(args.model)
    records = read_summary_records(args.records)
    kept, dropped = resample.resample_records(records, model, inclusive=not args.exclusive)
    write_summary_records(args.out, kept)
    report = resample.resample_report(len(records), len(kept))
    report_path = args.report or str(Path(args.out).with_suffix(".report.json"))
    write_json(report_path, report)
    logger.info("kept %d of %d records (%d dropped)", len(kept), len(records), dropped)
    return 0


def cmd_assemble(args) -> int:
    tokenizer = _tokenizer(args)
    ed = read_summary_records(args.ed) if args.ed else []
    ad = read_summary_records(args.ad) if args.ad else []
    hd = load_hd_records(_resolve_hd(args.hd), tokenizer)
    config = pyramid.PyramidConfig(
        seed=args.seed,
        ad_fraction_tau=args.tau,
        ad_fraction_sigma=args.sigma_fraction,
    )
    if args.tau is not None:
        if args.pool_size is None:
            raise SumPyramidError("--tau needs --pool-size")
        ed, ad = pyramid.fixed_pool(ed, ad, args.tau, args.pool_size, args.seed)
    elif args.sigma_fraction is not None:
        ed, ad = pyramid.increasing_pool(ed, ad, args.sigma_fraction, args.seed)
    if args.hd_subsample is not None:
        hd = pyramid.subsample(hd, args.hd_subsample, args.seed)
    manifest = pyramid.assemble(ed, ad, hd, args.out, config, tokenizer)
    logger.info("assembled pyramid at %s: %s", args.out, manifest["counts"])
    return 0


def cmd_stats(args) -> int:
    tiers = pyramid.load_pyramid(args.pyramid)
    stats = pyramid.pyramid_stats(tiers)
    write_json(Path(args.pyramid) / "stats.json", stats)
    _emit(args, stats, pyramid.format_stats_table(stats))
    return 0


def cmd_plan(args) -> int:
    overrides = {}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    if args.batch_size is not None:
        overrides["batch_size"] = args.batch_size
    stages = schedule.plan(args.pyramid, args.out, mode=args.mode, seed=args.seed, overrides=overrides)
    logger.info("planned %d stage(s) under %s", len(stages), args.out)
    return 0


def cmd_run_hft(args) -> int:
    manifest_paths = sorted(Path(args.plan).glob("stage_*.json"))
    if not manifest_paths:
        raise SumPyramidError(f"no stage manifests under {args.plan}")
    entries = schedule.execute(
        manifest_paths, shlex.split(args.trainer), args.out, resume=args.resume
    )
    for entry in entries:
        logger.info(
            "stage %s: exit %s checkpoint %s",
            entry["stage"], entry["exit_status"], entry["checkpoint_digest"],
        )
    return 0


def cmd_verify_theory(args) -> int:
    report = infotheory.monte_carlo(args.samples, seed=args.seed, alphabet=args.alphabet, jobs=args.jobs)
    if args.out:
        write_json(args.out, report)
    table = (
        f"samples            {report['n_samples']}\n"
        f"assumption holds   {report['n_assumption_satisfied']}\n"
        f"staged gain wins   {report['n_hierarchical_wins']}\n"
        f"counterexamples    {len(report['counterexamples'])}"
    )
    _emit(args, report, table)
    return 0


def cmd_score(args) -> int:
    tokenizer = _tokenizer(args)
    aligned = evaluate.align_by_id(read_jsonl(args.predictions), read_jsonl(args.references))
    extra = None
    if args.external_scores:
        rows = {str(o["id"]): o for o in read_jsonl(args.external_scores)}
        names = sorted({k for o in rows.values() for k in o if k != "id"})
        extra = {name: [float(rows[i].get(name, 0.0)) for i, _, _ in aligned] for name in names}
    report = evaluate.score_corpus([(g, r) for _, g, r in aligned], tokenizer, extra)
    if args.out:
        write_json(args.out, report.to_json())
    means = report.means
    table = "\n".join(f"{key:<6}{means[key]:>8.2f}" for key in sorted(means))
    _emit(args, report.to_json(), f"n = {report.n}\n{table}")
    return 0


def cmd_compare(args) -> int:
    tokenizer = _tokenizer(args)
    gold = {str(o["id"]): evaluate.ElementAnnotation.from_json(o) for o in read_jsonl(args.gold_annotations)}
    ann1 = {str(o["id"]): evaluate.ElementAnnotation.from_json(o) for o in read_jsonl(args.sys1_annotations)}
    ann2 = {str(o["id"]): evaluate.ElementAnnotation.from_json(o) for o in read_jsonl(args.sys2_annotations)}
    sum1 = {i: s for i, s in iter_summaries(args.sys1)}
    sum2 = {i: s for i, s in iter_summaries(args.sys2)}
    refs = list(iter_summaries(args.references))

    verdicts = []
    tally = {"Win": 0, "Equal": 0, "Fail": 0}
    for ref_id, ref_summary in refs:
        missing = [name for name, pool in (("sys1", sum1), ("sys2", sum2), ("gold annotations", gold),
                                            ("sys1 annotations", ann1), ("sys2 annotations", ann2))
                   if ref_id not in pool]
        if missing:
            raise SumPyramidError(f"id {ref_id!r} missing from: {', '.join(missing)}")
        v = evaluate.verdict(
            gold[ref_id],
            ann1[ref_id],
            ann2[ref_id],
            len(tokenizer.tokenize(sum1[ref_id])),
            len(tokenizer.tokenize(sum2[ref_id])),
            len(tokenizer.tokenize(ref_summary)),
            tolerance_ratio=args.tolerance,
        )
        tally[v.outcome] += 1
        verdicts.append({"id": ref_id, **v.to_json()})
    report = {"n": len(verdicts), "tally": tally, "verdicts": verdicts}
    if args.out:
        write_json(args.out, report)
    table = "\n".join(f"{k:<6}{tally[k]:>6}" for k in ("Win", "Equal", "Fail"))
    _emit(args, report, f"n = {len(verdicts)}\n{table}")
    return 0


def iter_summaries(path: str):
    for obj in read_jsonl(path):
        if "id" not in obj or "summary" not in obj:
            raise SumPyramidError(f"{path}: records need 'id' and 'summary'")
        yield str(obj["id"]), str(obj["summary"])


# --- pipeline ---------------------------------------------------------------


def cmd_pipeline(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed_marker = out / "FAILED"
    if failed_marker.exists():
        failed_marker.unlink()
    try:
        _pipeline(args, out)
    except Exception as exc:
        failed_marker.write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        raise
    return 0


def _pipeline(args, out: Path) -> None:
    tokenizer = _tokenizer(args)
    corpus_path = _resolve_corpus(args.corpus)
    hd_path = _resolve_hd(args.hd)

    # 0. config snapshot (path-free core + input digests)
    core = {
        "seed": args.seed,
        "split_ratio": [0.8, 0.2],
        "tokenizer_id": tokenizer.tokenizer_id,
        "backend": args.backend,
        "variant": args.variant,
        "sent_num": args.sent_num,
        "word_num": args.word_num,
        "doc_trunc": args.doc_trunc,
        "mode": args.mode,
        "inputs": {
            "corpus_sha256": sha256_file(corpus_path),
            "hd_sha256": sha256_file(hd_path),
        },
    }
    config_snapshot = {**core, "config_digest": digest_obj(core)}
    write_json(out / "config.json", config_snapshot)

    # 1. split the training corpus into ED and AD sources
    config = pyramid.PyramidConfig(seed=args.seed)
    ed_source, ad_source = pyramid.split_corpus(iter_corpus(corpus_path), config)
    write_jsonl(out / "sources" / "ed_source.jsonl", ({"id": i, "document": d} for i, d in ed_source))
    write_jsonl(out / "sources" / "ad_source.jsonl", ({"id": i, "document": d} for i, d in ad_source))
    logger.info("split corpus: %d ED source, %d AD source", len(ed_source), len(ad_source))

    # 2. extractive tier
    extractor = GapSentenceExtractor(variant=args.variant, doc_trunc=args.doc_trunc, tokenizer=tokenizer)
    ed_raw = list(extractor.extract_corpus(ed_source))
    write_summary_records(out / "ed_raw.jsonl", ed_raw)
    logger.info("extracted %d ED records", len(ed_raw))

    # 3. abstractive tier
    hd_records = load_hd_records(hd_path, tokenizer)
    if args.word_num is not None:
        word_num = args.word_num
    else:
        mean, _ = resample.exact_moments(hd_lengths(hd_records))
        word_num = max(1, round(float(mean)))
    spec = generate.PromptSpec(sent_num=args.sent_num, word_num=word_num)
    gen = generate.SummaryGenerator(
        spec=spec,
        backend=_make_backend(args, tokenizer),
        cache_dir=args.cache_dir,
        max_attempts=args.max_attempts,
        tokenizer=tokenizer,
    )
    ad_raw, rejects = gen.generate_corpus(ad_source, max_in_flight=args.jobs)
    write_summary_records(out / "ad_raw.jsonl", ad_raw)
    write_jsonl(out / "ad_rejects.jsonl", rejects)
    logger.info("generated %d AD records (%d rejects)", len(ad_raw), len(rejects))

    # 4. length model from the human tier
    model = resample.fit_length_model(hd_lengths(hd_records), tokenizer.tokenizer_id)
    model.save(out / "length_model.json")

    # 5. resample synthetic tiers into the human length interval
    ed_kept, _ = resample.resample_records(ed_raw, model)
    ad_kept, _ = resample.resample_records(ad_raw, model)
    write_json(
        out / "resample_report.json",
        {
            "ED": resample.resample_report(len(ed_raw), len(ed_kept)),
            "AD": resample.resample_report(len(ad_raw), len(ad_kept)),
        },
    )
    logger.info("resampled: ED %d->%d, AD %d->%d", len(ed_raw), len(ed_kept), len(ad_raw), len(ad_kept))

    # 6. assemble the pyramid
    pyramid.assemble(ed_kept, ad_kept, hd_records, out / "pyramid", config, tokenizer)

    # 7. per-tier statistics
    tiers = pyramid.load_pyramid(out / "pyramid")
    write_json(out / "pyramid" / "stats.json", pyramid.pyramid_stats(tiers))

    # 8. fine-tuning plan
    schedule.plan(out / "pyramid", out / "plan", mode=args.mode, seed=args.seed)

    # 9. digest every artifact for reproducibility checks
    digests = {}
    for path in sorted(out.rglob("*")):
        if path.is_file() and path.name != "digests.json":
            digests[path.relative_to(out).as_posix()] = sha256_file(path)
    write_json(out / "digests.json", digests)
    logger.info("pipeline complete: %d artifacts under %s", len(digests), out)


# --- parser -----------------------------------------------------------------


def _add_tokenizer_flags(p):
    p.add_argument("--tokenizer", choices=["word", "external_vocab"], default="word")
    p.add_argument("--vocab", help="vocabulary file for external_vocab mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumpyramid",
        description="Tiered summarization corpus construction and evaluation",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-ed", help="extract single-sentence pseudo-summaries")
    p.add_argument("--corpus", required=True, help="corpus JSONL or 'mini'")
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=["f1", "recall"], default="f1")
    p.add_argument("--doc-trunc", type=int, default=1024)
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_build_ed)

    p = sub.add_parser("build-ad", help="generate abstractive summaries via an LLM backend")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=["mock", "live"], default="mock")
    p.add_argument("--backend-config", help="TOML/JSON backend config file")
    p.add_argument("--endpoint")
    p.add_argument("--model", default="mock")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sent-num", type=int, default=3)
    p.add_argument("--word-num", type=int, default=None)
    p.add_argument("--hd", help="HD records to derive the word budget from")
    p.add_argument("--cache-dir")
    p.add_argument("--reject-file")
    p.add_argument("--max-attempts", type=int, default=3)
    p.add_argument("--max-in-flight", type=int, default=1)
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_build_ad)

    p = sub.add_parser("fit-length", help="fit the reference length model")
    p.add_argument("--hd", required=True)
    p.add_argument("--out", required=True, help="output JSON file")
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_fit_length)

    p = sub.add_parser("resample", help="filter records to the length interval")
    p.add_argument("--records", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--exclusive", action="store_true", help="treat interval bounds as excluded")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("assemble", help="build the three-tier dataset")
    p.add_argument("--ed")
    p.add_argument("--ad")
    p.add_argument("--hd", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float, default=None, help="AD share of a fixed-size synthetic pool")
    p.add_argument("--pool-size", type=int, default=None)
    p.add_argument("--sigma-fraction", type=float, default=None, help="AD fraction stacked on all of ED")
    p.add_argument("--hd-subsample", type=int, default=None)
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("stats", help="per-tier token length statistics")
    p.add_argument("--pyramid", required=True)
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plan", help="emit fine-tuning stage manifests")
    p.add_argument("--pyramid", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=list(schedule.MODES), default="hft")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run-hft", help="run the trainer over a stage plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--trainer", required=True, help="trainer command line")
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=cmd_run_hft)

    p = sub.add_parser("verify-theory", help="Monte Carlo entropy-gain report")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alphabet", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_verify_theory)

    p = sub.add_parser("score", help="ROUGE-score predictions against references")
    p.add_argument("--predictions", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--external-scores", help="JSONL of precomputed per-id scores to fold in")
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "table"], default="table")
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare", help="pairwise informativeness protocol")
    p.add_argument("--sys1", required=True, help="system 1 summaries JSONL")
    p.add_argument("--sys2", required=True, help="system 2 summaries JSONL")
    p.add_argument("--references", required=True)
    p.add_argument("--gold-annotations", required=True)
    p.add_argument("--sys1-annotations", required=True)
    p.add_argument("--sys2-annotations", required=True)
    p.add_argument("--tolerance", type=float, default=evaluate.DEFAULT_LENGTH_TOLERANCE)
    p.add_argument("--out")
    p.add_argument("--format", choices=["json", "table"], default="table")
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="run the full corpus-construction sequence")
    p.add_argument("--corpus", required=True)
    p.add_argument("--hd", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=["mock", "live"], default="mock")
    p.add_argument("--backend-config")
    p.add_argument("--endpoint")
    p.add_argument("--model", default="mock")
    p.add_argument("--variant", choices=["f1", "recall"], default="f1")
    p.add_argument("--sent-num", type=int, default=3)
    p.add_argument("--word-num", type=int, default=None)
    p.add_argument("--doc-trunc", type=int, default=1024)
    p.add_argument("--mode", choices=list(schedule.MODES), default="hft")
    p.add_argument("--cache-dir")
    p.add_argument("--max-attempts", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    _add_tokenizer_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except SumPyramidError as exc:
        logger.error("%s", exc)
        return 1
    except (FileNotFoundError, PermissionError, json.JSONDecodeError) as exc:
        logger.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
