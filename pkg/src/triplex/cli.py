"""Command-line interface: ingest, extract, eval, report, sample, run-all.

Exit codes: 0 on success, 1 when partial failures were recorded in run
stats, 2 on fatal configuration or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import PipelineConfig, load_config
from .corpus import load_corpus, preprocess_index, read_corpus_jsonl, write_corpus_jsonl
from .errors import ConfigurationError, ExtractionError, TriplexError
from .evaluation import (
    MatchConfig,
    MatchMode,
    Metrics,
    coverage_score,
    distribution_divergence,
    match,
    metrics_from,
    predicate_distribution,
    redundancy_score,
    sample_for_annotation,
    write_annotation_csv,
)
from .extraction import read_run, run_extraction, write_run
from .gold import load_gold
from .llmclient import make_client
from .prompting import PromptTemplates, PromptVariant, load_example_bank
from .report import heatmap_spec_from_distributions, write_report_bundle

__all__ = ["main", "entrypoint"]

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_FATAL = 2

_VARIANT_CHOICES = [v.value for v in PromptVariant] + ["all"]


def _variants(name: str) -> list[PromptVariant]:
    if name == "all":
        return list(PromptVariant)
    return [PromptVariant.from_name(name)]


def cmd_ingest(config: PipelineConfig) -> int:
    index = load_corpus(config.source_dir, limit=config.corpus_limit)
    index = preprocess_index(index, config.preprocess)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    write_corpus_jsonl(index, config.corpus_cache)
    print(
        f"wrote {config.corpus_cache} "
        f"({len(index.documents)} documents, {len(index.load_errors)} load errors)"
    )
    for filename, reason in index.load_errors:
        print(f"  skipped {filename}: {reason}", file=sys.stderr)
    return EXIT_PARTIAL if index.load_errors else EXIT_OK


def cmd_extract(config: PipelineConfig, variant_name: str, backend: str) -> int:
    corpus = read_corpus_jsonl(config.corpus_cache)
    bank = load_example_bank(config.examples_file)
    templates = PromptTemplates.from_dir(config.template_dir)
    client = make_client(config.endpoint, backend)
    config.runs_dir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    for variant in _variants(variant_name):
        try:
            run = run_extraction(
                corpus,
                variant,
                bank,
                client,
                config.preprocess,
                templates=templates,
                generic_lexicon=config.generic_terms,
            )
        except ExtractionError as exc:
            print(f"{variant.value}: {exc}", file=sys.stderr)
            worst = max(worst, EXIT_PARTIAL)
            continue
        path = config.runs_dir / f"{variant.value}.jsonl"
        write_run(run, path)
        print(
            f"wrote {path} ({len(run.triples)} triples, "
            f"{run.stats['chunks_processed']} chunks, "
            f"{run.stats['chunks_failed']} failed)"
        )
        if run.stats["chunks_failed"]:
            worst = max(worst, EXIT_PARTIAL)
    return worst


def _load_runs(config: PipelineConfig) -> dict[str, object]:
    runs = {}
    if config.runs_dir.is_dir():
        for path in sorted(config.runs_dir.glob("*.jsonl")):
            run = read_run(path)
            runs[run.variant.value] = run
    if not runs:
        raise ConfigurationError(f"no runs found under {config.runs_dir}; run extract first")
    return runs


def cmd_eval(config: PipelineConfig, backend: str) -> int:
    runs = _load_runs(config)
    gold = load_gold(config.eval.gold_path)
    client = make_client(config.endpoint, backend)
    gold_dist = predicate_distribution(gold.triples)
    embedding_model = (
        "mock (hashed character trigrams)"
        if backend == "mock"
        else config.endpoint.embedding_model
    )
    report: dict = {
        "header": {
            "gold_size": len(gold),
            "gold_annotator": gold.annotator,
            "recall_denominator": "full gold set size",
            "embedding_model": embedding_model,
            "semantic_threshold": config.eval.semantic_threshold,
            "assignment": config.eval.assignment.value,
            "seed": config.eval.seed,
        },
        "variants": {},
    }
    for name in sorted(runs):
        run = runs[name]
        entry: dict = {}
        for mode in MatchMode:
            match_config = MatchConfig(
                mode=mode,
                semantic_threshold=config.eval.semantic_threshold,
                assignment=config.eval.assignment,
            )
            result = match(
                run.triples,
                gold.triples,
                match_config,
                embedder=client if mode is MatchMode.SEMANTIC else None,
            )
            metrics = metrics_from(result, len(run.triples), len(gold))
            entry[mode.value] = {
                "precision": round(metrics.precision, 6),
                "recall": round(metrics.recall, 6),
                "f1": round(metrics.f1, 6),
                "pairs": len(result.pairs),
                "unmatched_predicted": len(result.unmatched_predicted),
                "unmatched_gold": len(result.unmatched_gold),
                "semantic_threshold": config.eval.semantic_threshold,
                "assignment": config.eval.assignment.value,
            }
        dist = predicate_distribution(run.triples)
        entry["redundancy"] = (
            round(
                redundancy_score(run.triples, client, config.eval.redundancy_threshold), 6
            )
            if run.triples
            else 0.0
        )
        entry["jsd_to_gold"] = (
            round(distribution_divergence(dist, gold_dist), 6) if dist.total else 1.0
        )
        entry["coverage"] = round(coverage_score(run.triples, gold.triples), 6)
        entry["n_predicted"] = len(run.triples)
        report["variants"][name] = entry
    config.output_dir.mkdir(parents=True, exist_ok=True)
    config.eval_report_path.write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {config.eval_report_path} ({len(runs)} variants, 3 match modes)")
    return EXIT_OK


def cmd_report(config: PipelineConfig) -> int:
    runs = _load_runs(config)
    if not config.eval_report_path.is_file():
        raise ConfigurationError(
            f"eval report not found: {config.eval_report_path}; run eval first"
        )
    eval_report = json.loads(config.eval_report_path.read_text(encoding="utf-8"))
    table_results = {}
    for variant, entry in eval_report["variants"].items():
        table_results[variant] = {
            mode: Metrics(
                precision=entry[mode]["precision"],
                recall=entry[mode]["recall"],
                f1=entry[mode]["f1"],
            )
            for mode in ("exact", "semantic")
        }
    distributions = {
        name: predicate_distribution(run.triples) for name, run in runs.items()
    }
    spec = heatmap_spec_from_distributions(distributions, top_k=config.eval.heatmap_top_k)
    written = write_report_bundle(
        config.report_dir,
        table_results,
        distributions,
        spec,
        frequency_top_k=config.eval.frequency_top_k,
    )
    print(f"wrote {len(written)} report files under {config.report_dir}")
    return EXIT_OK


def cmd_sample(config: PipelineConfig, variant_name: str) -> int:
    if variant_name == "all":
        raise ConfigurationError("sample needs a single --variant, not 'all'")
    variant = PromptVariant.from_name(variant_name)
    path = config.runs_dir / f"{variant.value}.jsonl"
    if not path.is_file():
        raise ConfigurationError(f"run file not found: {path}; run extract first")
    run = read_run(path)
    records = sample_for_annotation(run, n=config.eval.sample_size, seed=config.eval.seed)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.output_dir / "annotation_sample.csv"
    write_annotation_csv(records, out_path)
    print(f"wrote {out_path} ({len(records)} rows)")
    return EXIT_OK


def cmd_run_all(config: PipelineConfig, backend: str) -> int:
    worst = cmd_ingest(config)
    worst = max(worst, cmd_extract(config, "all", backend))
    worst = max(worst, cmd_eval(config, backend))
    worst = max(worst, cmd_report(config))
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triplex",
        description="Extract subject-predicate-object triples from trade agreement "
        "XML corpora with prompted LLM calls, and evaluate them against a gold set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("ingest", "load and preprocess the XML corpus into corpus.jsonl"),
        ("extract", "run prompt-based triple extraction over the cached corpus"),
        ("eval", "score runs against the gold set in all three match modes"),
        ("report", "render metric tables, frequency charts, and the heatmap"),
        ("sample", "draw a reproducible annotation sample from one run"),
        ("run-all", "ingest, extract all variants, eval, report"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the pipeline JSON config")
        cmd.add_argument("--seed", type=int, default=None, help="override every configured seed")
        cmd.add_argument("--out", default=None, help="override the configured output directory")
        if name in ("extract", "sample"):
            cmd.add_argument(
                "--variant",
                default="all" if name == "extract" else None,
                choices=_VARIANT_CHOICES,
                required=name == "sample",
                help="prompt variant",
            )
        if name in ("extract", "eval", "run-all"):
            cmd.add_argument(
                "--backend",
                default="mock",
                choices=["live", "mock"],
                help="model backend (default: mock)",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, seed=args.seed, out=args.out)
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "extract":
            return cmd_extract(config, args.variant, args.backend)
        if args.command == "eval":
            return cmd_eval(config, args.backend)
        if args.command == "report":
            return cmd_report(config)
        if args.command == "sample":
            return cmd_sample(config, args.variant)
        if args.command == "run-all":
            return cmd_run_all(config, args.backend)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except TriplexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


def entrypoint() -> None:
    sys.exit(main())
