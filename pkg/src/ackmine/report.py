"""Pipeline runner and report bundle writer.

``run_pipeline`` executes ingest -> tag -> disambiguate -> analyze and
writes every stage output plus a manifest into the report directory.
Reruns with identical inputs and config produce byte-identical data files;
only the manifest's timestamps and timings vary.
"""

from __future__ import annotations

import csv
import glob
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .config import ConfigError, PipelineConfig
from .corpus import (
    DOMAINS,
    CorpusFilter,
    CorpusRecord,
    coverage_stats,
    default_domain_map,
    filter_records,
    load_domain_map,
    map_disciplines,
    parse_field_tagged,
    read_corpus_jsonl,
    sample_per_domain,
    write_corpus_jsonl,
)
from .disambig import (
    CanonicalEntity,
    DisambiguationResult,
    disambiguate_pipeline,
    load_overrides,
    read_entities_jsonl,
    write_entities_jsonl,
)
from .gazetteer import Gazetteer, load_gazetteer
from .stats import (
    DegenerateTableError,
    StatisticsError,
    chi_square_independence,
    cramers_v,
    entity_domain_table,
    entity_label_table,
    frequency_by_type_domain,
    length_stats,
    mean_std_per_paper,
    one_way_anova,
    pearson_matrix,
    _ranked_entities,
    assemble_record_variables,
    yearly_trends,
)
from .tagging import (
    LABELS,
    EntitySpan,
    gazetteer_tag,
    import_external_tags,
    read_spans_jsonl,
    write_spans_jsonl,
)
from .textmetrics import DEFAULT_ABBREVIATIONS, load_abbreviations

REPORT_TABLES = (
    "coverage.csv",
    "entity_type_by_domain.csv",
    "mean_std_per_paper.csv",
    "length_stats.csv",
    "yearly_trends.csv",
    "association_tests.csv",
    "pearson_matrix.csv",
    "anova.csv",
    "entity_rankings.csv",
)


class PipelineError(Exception):
    """A pipeline stage failed; carries the stage name for reporting."""

    def __init__(self, stage: str, message: str, details: Sequence[str] = ()):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.details = list(details)


class ParseFailure(PipelineError):
    """Nothing usable could be parsed from the input files."""


@dataclass
class StageRecord:
    name: str
    seconds: float
    counts: dict = field(default_factory=dict)


@dataclass
class PipelineRun:
    report_dir: Path
    manifest: dict


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _resolve_gazetteer(path: str | None, kind: str) -> Gazetteer:
    if path is None:
        return Gazetteer.empty()
    if not Path(path).is_file():
        raise ConfigError(f"{kind} gazetteer not found: {path}")
    return load_gazetteer(path)


def _resolve_abbreviations(path: str | None) -> frozenset[str]:
    if path is None:
        return DEFAULT_ABBREVIATIONS
    if not Path(path).is_file():
        raise ConfigError(f"abbreviation list not found: {path}")
    return load_abbreviations(path)


def ingest_corpus(config: PipelineConfig) -> tuple[list[CorpusRecord], list[CorpusRecord], list[str]]:
    """Parse, map, filter, and optionally sample the configured inputs.

    Returns (filtered_records, sampled_records, issue_strings); sampling is
    the identity when ``sample_n`` is unset.
    """
    paths = sorted(glob.glob(config.input)) if config.input else []
    if not paths:
        raise ConfigError(f"no input files match {config.input!r}")
    domain_map = (
        load_domain_map(config.domain_map) if config.domain_map else default_domain_map()
    )
    records: list[CorpusRecord] = []
    issues: list[str] = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as handle:
            result = parse_field_tagged(handle)
        records.extend(result.records)
        issues.extend(f"{path}: {issue}" for issue in result.issues)
    if not records:
        raise ParseFailure(
            "ingest", f"no records parsed from {len(paths)} file(s)", issues
        )
    mapped = map_disciplines(records, domain_map)
    corpus_filter = CorpusFilter(
        year_min=config.year_min,
        year_max=config.year_max,
        languages=frozenset(config.languages),
        doc_types=frozenset(config.doc_types),
    )
    filtered = filter_records(mapped, corpus_filter)
    sampled = (
        sample_per_domain(filtered, config.sample_n, config.seed)
        if config.sample_n is not None
        else filtered
    )
    return filtered, sampled, issues


def tag_corpus(config: PipelineConfig, corpus: Sequence[CorpusRecord]) -> tuple[list[EntitySpan], list[str]]:
    """Produce spans with the configured tagger; returns (spans, issues)."""
    if config.tagger_mode == "import":
        if not config.tags or not Path(config.tags).is_file():
            raise ConfigError(f"tags file not found: {config.tags}")
        with open(config.tags, "r", encoding="utf-8") as handle:
            result = import_external_tags(handle, corpus)
        spans = result.spans
        issues = [str(issue) for issue in result.issues]
    else:
        fund = _resolve_gazetteer(config.fund_gazetteer, "funding")
        uni = _resolve_gazetteer(config.uni_gazetteer, "university")
        cor = _resolve_gazetteer(config.cor_gazetteer, "corporation")
        spans = []
        for record in corpus:
            if record.ack_text is None:
                continue
            spans.extend(gazetteer_tag(record, fund, uni, cor))
        issues = []
    spans.sort(key=lambda s: (s.record_id, s.start))
    return spans, issues


def disambiguate_spans(
    config: PipelineConfig,
    spans: Sequence[EntitySpan],
    corpus: Sequence[CorpusRecord],
) -> DisambiguationResult:
    fund = _resolve_gazetteer(config.fund_gazetteer, "funding")
    uni = _resolve_gazetteer(config.uni_gazetteer, "university")
    overrides = load_overrides(config.overrides) if config.overrides else []
    domain_by_record = {record.record_id: record.domain for record in corpus}
    return disambiguate_pipeline(
        spans,
        domain_by_record,
        fund,
        uni,
        overrides,
        name_threshold=config.name_threshold,
        abbrev_threshold=config.abbrev_threshold,
        cor_partial_threshold=config.cor_partial_threshold,
        misspelling_threshold=config.misspelling_threshold,
        min_chars=config.min_chars,
    )


def run_pipeline(config: PipelineConfig) -> PipelineRun:
    """Execute the full pipeline and write the report bundle."""
    config.validate()
    report_dir = Path(config.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "tool": "ackmine",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": config.to_snapshot(),
        "inputs": [],
        "stages": [],
        "outputs": [],
        "issues": {},
        "status": "incomplete",
    }

    def finish_incomplete(stage: str, exc: Exception) -> None:
        manifest["error"] = {"stage": stage, "message": str(exc)}
        _write_manifest(report_dir, manifest)

    stage = "ingest"
    try:
        started = time.perf_counter()
        filtered, corpus, ingest_issues = ingest_corpus(config)
        for path in sorted(glob.glob(config.input)):
            p = Path(path)
            manifest["inputs"].append(
                {"path": str(p), "sha256": _sha256(p), "bytes": p.stat().st_size}
            )
        write_corpus_jsonl(corpus, report_dir / "corpus.jsonl")
        manifest["stages"].append(
            {
                "name": stage,
                "seconds": round(time.perf_counter() - started, 6),
                "counts": {
                    "records_filtered": len(filtered),
                    "records_in_corpus": len(corpus),
                    "parse_issues": len(ingest_issues),
                },
            }
        )
        manifest["issues"]["ingest"] = ingest_issues
        manifest["outputs"].append("corpus.jsonl")

        stage = "tag"
        started = time.perf_counter()
        spans, tag_issues = tag_corpus(config, corpus)
        write_spans_jsonl(spans, report_dir / "tags.jsonl")
        manifest["stages"].append(
            {
                "name": stage,
                "seconds": round(time.perf_counter() - started, 6),
                "counts": {"spans": len(spans), "rejected_lines": len(tag_issues)},
            }
        )
        manifest["issues"]["tag"] = tag_issues
        manifest["outputs"].append("tags.jsonl")

        stage = "disambiguate"
        started = time.perf_counter()
        result = disambiguate_spans(config, spans, corpus)
        write_entities_jsonl(result.entities, report_dir / "entities.jsonl")
        manifest["stages"].append(
            {
                "name": stage,
                "seconds": round(time.perf_counter() - started, 6),
                "counts": {
                    "spans_in": result.input_mentions,
                    "spans_dropped": result.dropped_mentions,
                    "mentions_aggregated": result.aggregated_mentions,
                    "entities": len(result.entities),
                },
            }
        )
        manifest["outputs"].append("entities.jsonl")

        stage = "analyze"
        started = time.perf_counter()
        tables = write_analysis_tables(
            report_dir,
            corpus,
            spans,
            result.entities,
            seed=config.seed,
            resamples=config.bootstrap_resamples,
            abbreviations=_resolve_abbreviations(config.abbreviations),
        )
        manifest["stages"].append(
            {
                "name": stage,
                "seconds": round(time.perf_counter() - started, 6),
                "counts": {"tables": len(tables)},
            }
        )
        manifest["outputs"].extend(tables)
    except Exception as exc:
        finish_incomplete(stage, exc)
        raise

    manifest["status"] = "complete"
    _write_manifest(report_dir, manifest)
    return PipelineRun(report_dir, manifest)


def _write_manifest(report_dir: Path, manifest: dict) -> None:
    with open(report_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


# ---------------------------------------------------------------------------
# Table writers. Every CSV gets a JSON mirror with unrounded values.


def _fmt(value, digits: int = 6) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        if math.isinf(value):
            return "inf"
        return f"{value:.{digits}f}"
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and (math.isnan(value) or math.isinf(value)):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def _write_table(
    report_dir: Path,
    name: str,
    header: Sequence[str],
    rows: Iterable[Sequence],
    digits: dict[str, int] | None = None,
) -> list[str]:
    """Write a CSV (floats rounded per ``digits``, default 6) and a JSON
    mirror carrying the raw unrounded values."""
    rows = list(rows)
    digits = digits or {}
    csv_path = report_dir / f"{name}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    _fmt(value, digits.get(key, 6)) if isinstance(value, float) else _fmt(value)
                    for key, value in zip(header, row)
                ]
            )
    json_path = report_dir / f"{name}.json"
    payload = [
        {key: _jsonable(value) for key, value in zip(header, row)} for row in rows
    ]
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    return [f"{name}.csv", f"{name}.json"]


def _write_coverage(report_dir: Path, coverage) -> list[str]:
    return _write_table(
        report_dir,
        "coverage",
        (
            "domain",
            "article_count",
            "with_ack_text",
            "with_funding_index",
            "pct_with_ack_text",
            "pct_of_those_with_funding_index",
        ),
        [
            (
                c.domain,
                c.article_count,
                c.with_ack_text,
                c.with_funding_index,
                c.pct_with_ack_text,
                c.pct_of_those_with_funding_index,
            )
            for c in coverage
        ],
        digits={"pct_with_ack_text": 1, "pct_of_those_with_funding_index": 1},
    )


def write_analysis_tables(
    report_dir: Path,
    corpus: Sequence[CorpusRecord],
    spans: Sequence[EntitySpan],
    entities: Sequence[CanonicalEntity],
    seed: int,
    resamples: int,
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> list[str]:
    """Write every analysis table (and JSON mirror) into ``report_dir``."""
    outputs: list[str] = []
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)

    outputs += _write_coverage(report_dir, coverage_stats(corpus))

    type_domain = frequency_by_type_domain(entities)
    rows = []
    col_totals = type_domain.col_totals()
    for label, row, total in zip(
        type_domain.row_labels, type_domain.counts, type_domain.row_totals()
    ):
        rows.append((label, *row, total))
    rows.append(("total", *col_totals, type_domain.n))
    outputs += _write_table(
        report_dir, "entity_type_by_domain", ("label", *DOMAINS, "total"), rows
    )

    present = {
        (s.domain, s.label): s for s in mean_std_per_paper(spans, corpus, "present")
    }
    over_all = {
        (s.domain, s.label): s for s in mean_std_per_paper(spans, corpus, "all")
    }
    rows = []
    for key in sorted(
        set(present) | set(over_all),
        key=lambda k: (DOMAINS.index(k[0]), LABELS.index(k[1])),
    ):
        a, b = present.get(key), over_all.get(key)
        rows.append(
            (
                key[0],
                key[1].value,
                a.mean if a else None,
                a.std if a else None,
                a.n if a else 0,
                b.mean if b else None,
                b.std if b else None,
                b.n if b else 0,
            )
        )
    outputs += _write_table(
        report_dir,
        "mean_std_per_paper",
        (
            "domain",
            "label",
            "mean_papers_with_label",
            "std_papers_with_label",
            "n_papers_with_label",
            "mean_all_papers",
            "std_all_papers",
            "n_all_papers",
        ),
        rows,
    )

    outputs += _write_table(
        report_dir,
        "length_stats",
        ("domain", "n", "median_sentences", "median_words"),
        [
            (s.domain, s.n, s.median_sentences, s.median_words)
            for s in length_stats(corpus, abbreviations)
        ],
        digits={"median_sentences": 1, "median_words": 1},
    )

    trend_rows = []
    for metric in ("sentences", "words"):
        for point in yearly_trends(corpus, metric, resamples, seed, abbreviations):
            trend_rows.append(
                (point.domain, point.year, metric, point.median, point.ci_low, point.ci_high)
            )
    outputs += _write_table(
        report_dir,
        "yearly_trends",
        ("domain", "year", "metric", "median", "ci_low", "ci_high"),
        trend_rows,
        digits={"median": 1, "ci_low": 4, "ci_high": 4},
    )

    assoc_rows = []
    for name, table in (
        ("entity type - scientific domain", type_domain),
        ("entity - scientific domain", entity_domain_table(entities)),
        ("entity - entity type", entity_label_table(entities)),
    ):
        pruned = table.pruned()
        try:
            chi = chi_square_independence(pruned)
            v = cramers_v(pruned)
            assoc_rows.append(
                (
                    name,
                    chi.statistic,
                    chi.p_value,
                    chi.dof,
                    v.v,
                    v.dof,
                    chi.min_expected,
                    str(chi.low_expected).lower(),
                    "ok",
                )
            )
        except (DegenerateTableError, StatisticsError) as exc:
            assoc_rows.append((name, None, None, None, None, None, None, "", str(exc)))
    outputs += _write_table(
        report_dir,
        "association_tests",
        (
            "variables",
            "chi_square",
            "p_value",
            "chi_square_dof",
            "cramers_v",
            "cramers_v_dof",
            "min_expected",
            "low_expected",
            "note",
        ),
        assoc_rows,
        digits={"chi_square": 3, "min_expected": 3},
    )

    matrix = pearson_matrix(corpus, spans, normalize=True, abbreviations=abbreviations)
    outputs += _write_table(
        report_dir,
        "pearson_matrix",
        ("variable", *matrix.variables),
        [
            (variable, *row)
            for variable, row in zip(matrix.variables, matrix.matrix)
        ],
    )

    anova_rows = []
    variables, columns = assemble_record_variables(corpus, spans, abbreviations)
    domains_per_row = [
        record.domain for record in corpus if record.ack_text is not None
    ]
    for variable, column in zip(variables, columns):
        groups = []
        for domain in DOMAINS:
            group = [v for v, d in zip(column, domains_per_row) if d == domain]
            if group:
                groups.append(group)
        try:
            result = one_way_anova(groups)
            anova_rows.append(
                (
                    variable,
                    result.f_statistic,
                    result.dof_between,
                    result.dof_within,
                    result.p_value,
                    "ok",
                )
            )
        except StatisticsError as exc:
            anova_rows.append((variable, None, None, None, None, str(exc)))
    outputs += _write_table(
        report_dir,
        "anova",
        ("variable", "f_statistic", "dof_between", "dof_within", "p_value", "note"),
        anova_rows,
    )

    ranking_rows = []
    for domain in (*DOMAINS, None):
        for label in LABELS:
            for rank, (entity, count) in enumerate(
                _ranked_entities(entities, label, domain), start=1
            ):
                ranking_rows.append(
                    (domain or "all", label.value, rank, count, entity.canonical)
                )
    outputs += _write_table(
        report_dir,
        "entity_rankings",
        ("domain", "label", "rank", "mention_count", "canonical"),
        ranking_rows,
    )

    return outputs


def load_corpus_file(path: str | Path) -> list[CorpusRecord]:
    if not Path(path).is_file():
        raise ConfigError(f"corpus file not found: {path}")
    return read_corpus_jsonl(path)


def load_entities_file(path: str | Path) -> list[CanonicalEntity]:
    if not Path(path).is_file():
        raise ConfigError(f"entities file not found: {path}")
    return read_entities_jsonl(path)


def load_spans_file(path: str | Path) -> list[EntitySpan]:
    if not Path(path).is_file():
        raise ConfigError(f"tags file not found: {path}")
    return read_spans_jsonl(path)
