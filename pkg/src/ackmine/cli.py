"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, tag, evaluate,
disambiguate, analyze) plus ``run`` for the whole chain. Every option can
come from a flat TOML config via ``--config``; explicit flags win. The
report directory alone may also be overridden through the
``ACKMINE_REPORT_DIR`` environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, PipelineConfig, load_config
from .corpus import CorpusError, coverage_stats, write_corpus_jsonl
from .disambig import OverrideError, write_entities_jsonl
from .gazetteer import GazetteerError
from .report import (
    ParseFailure,
    PipelineError,
    disambiguate_spans,
    ingest_corpus,
    load_corpus_file,
    load_entities_file,
    load_spans_file,
    run_pipeline,
    tag_corpus,
    write_analysis_tables,
    _resolve_abbreviations,
)
from .stats import StatisticsError
from .tagging import TagValidationError, evaluate_tagger, write_spans_jsonl

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_STATISTICS = 5

logger = logging.getLogger("ackmine")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = _assemble_config(args)
        return args.handler(args, config)
    except (ConfigError, OverrideError, GazetteerError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (ParseFailure, CorpusError) as exc:
        logger.error("parse error: %s", exc)
        _log_details(exc)
        return EXIT_PARSE
    except TagValidationError as exc:
        logger.error("validation error: %s", exc)
        return EXIT_VALIDATION
    except StatisticsError as exc:
        logger.error("statistics error: %s", exc)
        return EXIT_STATISTICS
    except PipelineError as exc:
        logger.error("%s", exc)
        _log_details(exc)
        return EXIT_PARSE
    except ValueError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_CONFIG


def _log_details(exc: Exception) -> None:
    for detail in getattr(exc, "details", [])[:20]:
        logger.error("  %s", detail)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ackmine",
        description="Mine, disambiguate, and analyze acknowledged entities "
        "in bibliographic exports.",
    )
    parser.add_argument("--config", help="flat TOML config file; flags override it")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, filter, sample, and emit the corpus")
    p.add_argument("--input", help="glob of field-tagged export files")
    p.add_argument("--domain-map", dest="domain_map", help="classification,domain CSV")
    p.add_argument("--year-min", dest="year_min", type=int)
    p.add_argument("--year-max", dest="year_max", type=int)
    p.add_argument("--languages", help="comma-separated language list")
    p.add_argument("--doc-types", dest="doc_types", help="comma-separated doc types")
    p.add_argument("--sample-n", dest="sample_n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="corpus JSON-lines output")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("tag", help="tag acknowledged entities in a corpus")
    p.add_argument("--corpus", required=True, help="corpus JSON-lines file")
    p.add_argument("--mode", dest="tagger_mode", choices=("baseline", "import"))
    p.add_argument("--tags", help="tag-interchange JSON-lines (import mode)")
    p.add_argument("--fund-gazetteer", dest="fund_gazetteer")
    p.add_argument("--uni-gazetteer", dest="uni_gazetteer")
    p.add_argument("--cor-gazetteer", dest="cor_gazetteer")
    p.add_argument("--out", required=True, help="tag-interchange output")
    p.set_defaults(handler=cmd_tag)

    p = sub.add_parser("evaluate", help="score predicted tags against gold tags")
    p.add_argument("--gold", required=True, help="gold tag-interchange file")
    p.add_argument("--pred", required=True, help="predicted tag-interchange file")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("disambiguate", help="merge entity writing variants")
    p.add_argument("--tags", required=True, help="tag-interchange file")
    p.add_argument("--corpus", required=True, help="corpus JSON-lines file")
    p.add_argument("--fund-gazetteer", dest="fund_gazetteer")
    p.add_argument("--uni-gazetteer", dest="uni_gazetteer")
    p.add_argument("--overrides", help="surface,from_label,to_label CSV")
    p.add_argument("--name-threshold", dest="name_threshold", type=int)
    p.add_argument("--abbrev-threshold", dest="abbrev_threshold", type=int)
    p.add_argument("--cor-partial-threshold", dest="cor_partial_threshold", type=int)
    p.add_argument("--misspelling-threshold", dest="misspelling_threshold", type=int)
    p.add_argument("--min-chars", dest="min_chars", type=int)
    p.add_argument("--out", required=True, help="canonical entities output")
    p.set_defaults(handler=cmd_disambiguate)

    p = sub.add_parser("analyze", help="compute every statistics table")
    p.add_argument("--corpus", required=True)
    p.add_argument("--entities", required=True)
    p.add_argument("--tags", required=True)
    p.add_argument("--report-dir", dest="report_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--resamples", dest="bootstrap_resamples", type=int)
    p.add_argument("--abbreviations", help="sentence-splitter guard list")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("run", help="run the full pipeline and write the report bundle")
    p.add_argument("--input")
    p.add_argument("--domain-map", dest="domain_map")
    p.add_argument("--fund-gazetteer", dest="fund_gazetteer")
    p.add_argument("--uni-gazetteer", dest="uni_gazetteer")
    p.add_argument("--cor-gazetteer", dest="cor_gazetteer")
    p.add_argument("--overrides")
    p.add_argument("--tags")
    p.add_argument("--mode", dest="tagger_mode", choices=("baseline", "import"))
    p.add_argument("--report-dir", dest="report_dir")
    p.add_argument("--year-min", dest="year_min", type=int)
    p.add_argument("--year-max", dest="year_max", type=int)
    p.add_argument("--languages")
    p.add_argument("--doc-types", dest="doc_types")
    p.add_argument("--sample-n", dest="sample_n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--resamples", dest="bootstrap_resamples", type=int)
    p.add_argument("--abbreviations")
    p.set_defaults(handler=cmd_run)

    return parser


def _assemble_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    for spec in dataclasses.fields(PipelineConfig):
        value = getattr(args, spec.name, None)
        if value is None:
            continue
        if spec.name in ("languages", "doc_types") and isinstance(value, str):
            value = tuple(v.strip() for v in value.split(",") if v.strip())
        overrides[spec.name] = value
    config = dataclasses.replace(config, **overrides)
    env_report_dir = os.environ.get("ACKMINE_REPORT_DIR")
    if env_report_dir and "report_dir" not in overrides:
        config = dataclasses.replace(config, report_dir=env_report_dir)
    return config


def cmd_ingest(args: argparse.Namespace, config: PipelineConfig) -> int:
    _, corpus, issues = ingest_corpus(config)
    count = write_corpus_jsonl(corpus, args.out)
    for issue in issues[:20]:
        logger.warning("parse issue: %s", issue)
    if len(issues) > 20:
        logger.warning("... and %d more parse issues", len(issues) - 20)
    for stats in coverage_stats(corpus):
        logger.info(
            "%s: %d records, %s%% with ack text, %s%% of those with funding index",
            stats.domain,
            stats.article_count,
            _pct(stats.pct_with_ack_text),
            _pct(stats.pct_of_those_with_funding_index),
        )
    logger.info("wrote %d records to %s", count, args.out)
    return EXIT_OK


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.1f}"


def cmd_tag(args: argparse.Namespace, config: PipelineConfig) -> int:
    corpus = load_corpus_file(args.corpus)
    spans, issues = tag_corpus(config, corpus)
    count = write_spans_jsonl(spans, args.out)
    for issue in issues[:20]:
        logger.warning("rejected tag: %s", issue)
    if len(issues) > 20:
        logger.warning("... and %d more rejected tags", len(issues) - 20)
    logger.info("wrote %d spans to %s", count, args.out)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, config: PipelineConfig) -> int:
    gold = load_spans_file(args.gold)
    pred = load_spans_file(args.pred)
    report = evaluate_tagger(pred, gold)
    for label, scores in report.per_label.items():
        print(
            f"{label.value}: precision={scores.precision:.4f} "
            f"recall={scores.recall:.4f} f1={scores.f1:.4f}"
        )
    print(f"accuracy (mean F1): {report.accuracy:.4f}")
    return EXIT_OK


def cmd_disambiguate(args: argparse.Namespace, config: PipelineConfig) -> int:
    corpus = load_corpus_file(args.corpus)
    spans = load_spans_file(args.tags)
    result = disambiguate_spans(config, spans, corpus)
    count = write_entities_jsonl(result.entities, args.out)
    logger.info(
        "%d spans in, %d dropped, %d mentions over %d entities -> %s",
        result.input_mentions,
        result.dropped_mentions,
        result.aggregated_mentions,
        count,
        args.out,
    )
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace, config: PipelineConfig) -> int:
    corpus = load_corpus_file(args.corpus)
    entities = load_entities_file(args.entities)
    spans = load_spans_file(args.tags)
    outputs = write_analysis_tables(
        Path(config.report_dir),
        corpus,
        spans,
        entities,
        seed=config.seed,
        resamples=config.bootstrap_resamples,
        abbreviations=_resolve_abbreviations(config.abbreviations),
    )
    logger.info("wrote %d files to %s", len(outputs), config.report_dir)
    return EXIT_OK


def cmd_run(args: argparse.Namespace, config: PipelineConfig) -> int:
    run = run_pipeline(config)
    logger.info("report bundle written to %s", run.report_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
