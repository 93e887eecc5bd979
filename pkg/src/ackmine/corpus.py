"""Field-tagged bibliographic corpus: parsing, domain mapping, filtering,
sampling, and funding-coverage statistics.

The input format is a line-oriented field-tagged export: each record is a
series of ``TAG value`` lines, continuation lines start with whitespace, and
a record ends with a bare ``ER`` line. Only the tags listed in
:data:`KNOWN_TAGS` are interpreted; everything else is ignored.
"""

from __future__ import annotations

import csv
import io
import json
import random
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping

from .seeds import derive_seed

DOMAINS = ("oceanography", "economics", "social sciences", "computer science")

KNOWN_TAGS = frozenset({"UT", "PY", "LA", "DT", "SC", "TC", "FT", "FO", "FG"})

_TAG_LINE_RE = re.compile(r"^([A-Z][A-Z0-9])(?: (.*))?$")


class CorpusError(ValueError):
    """Raised for stream-level corpus failures (not per-record issues)."""


@dataclass(frozen=True)
class CorpusRecord:
    """One publication with its funding-related fields.

    ``ack_text`` mirrors the full acknowledgement text (FT); ``funding_orgs``
    and ``grant_numbers`` mirror the indexed FO/FG fields, which exist
    independently of the text.
    """

    record_id: str
    year: int
    language: str = ""
    doc_type: str = ""
    categories: tuple[str, ...] = ()
    domain: str | None = None
    ack_text: str | None = None
    funding_orgs: tuple[str, ...] = ()
    grant_numbers: tuple[str, ...] = ()
    citation_count: int = 0

    def __post_init__(self) -> None:
        if self.citation_count < 0:
            raise ValueError(f"record {self.record_id}: citation_count must be >= 0")
        if self.domain is not None and self.domain not in DOMAINS:
            raise ValueError(f"record {self.record_id}: unknown domain {self.domain!r}")

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "year": self.year,
            "language": self.language,
            "doc_type": self.doc_type,
            "categories": list(self.categories),
            "domain": self.domain,
            "ack_text": self.ack_text,
            "funding_orgs": list(self.funding_orgs),
            "grant_numbers": list(self.grant_numbers),
            "citation_count": self.citation_count,
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "CorpusRecord":
        return cls(
            record_id=data["record_id"],
            year=data["year"],
            language=data.get("language", ""),
            doc_type=data.get("doc_type", ""),
            categories=tuple(data.get("categories", ())),
            domain=data.get("domain"),
            ack_text=data.get("ack_text"),
            funding_orgs=tuple(data.get("funding_orgs", ())),
            grant_numbers=tuple(data.get("grant_numbers", ())),
            citation_count=data.get("citation_count", 0),
        )


@dataclass(frozen=True)
class ParseIssue:
    line_no: int
    message: str
    record_id: str | None = None

    def __str__(self) -> str:
        prefix = f"line {self.line_no}"
        if self.record_id:
            prefix += f" (record {self.record_id})"
        return f"{prefix}: {self.message}"


@dataclass
class ParseResult:
    records: list[CorpusRecord]
    issues: list[ParseIssue] = field(default_factory=list)


def parse_field_tagged(stream: Iterable[str] | io.TextIOBase | str) -> ParseResult:
    """Parse a field-tagged export into records.

    Malformed records (missing UT or PY, non-integer PY/TC, negative TC) are
    collected as issues and skipped; parsing continues. A final record with
    no ``ER`` terminator is reported with the line it started on.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)

    records: list[CorpusRecord] = []
    issues: list[ParseIssue] = []
    fields: dict[str, list[str]] = {}
    current_tag: str | None = None
    record_start_line: int | None = None
    line_no = 0

    def finish_record(end_line: int) -> None:
        nonlocal fields, current_tag, record_start_line
        record, issue = _assemble_record(fields, end_line)
        if record is not None:
            records.append(record)
        if issue is not None:
            issues.append(issue)
        fields = {}
        current_tag = None
        record_start_line = None

    for line in stream:
        line_no += 1
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        if line[0] in (" ", "\t"):
            if current_tag is None:
                issues.append(ParseIssue(line_no, "continuation line with no preceding tag"))
                continue
            fields.setdefault(current_tag, []).append(line.strip())
            continue
        if line.strip() == "ER":
            if record_start_line is None:
                issues.append(ParseIssue(line_no, "ER terminator with no open record"))
                continue
            finish_record(line_no)
            continue
        match = _TAG_LINE_RE.match(line)
        if match is None:
            issues.append(
                ParseIssue(line_no, f"unparseable line {line!r}", _current_id(fields))
            )
            continue
        tag, value = match.group(1), match.group(2) or ""
        if record_start_line is None:
            record_start_line = line_no
        current_tag = tag
        if tag in KNOWN_TAGS:
            fields.setdefault(tag, []).append(value.strip())
        # Unknown tags still update current_tag so their continuations attach
        # to them (and get ignored), not to the previous known field.

    if record_start_line is not None:
        issues.append(
            ParseIssue(
                record_start_line,
                f"record starting at line {record_start_line} was never terminated by ER",
                _current_id(fields),
            )
        )
    return ParseResult(records, issues)


def _current_id(fields: Mapping[str, list[str]]) -> str | None:
    values = fields.get("UT")
    return values[0] if values else None


def _assemble_record(
    fields: Mapping[str, list[str]], end_line: int
) -> tuple[CorpusRecord | None, ParseIssue | None]:
    record_id = _current_id(fields)
    if not record_id:
        return None, ParseIssue(end_line, "record is missing its UT (id) field")
    if "PY" not in fields or not fields["PY"][0]:
        return None, ParseIssue(end_line, "record is missing its PY (year) field", record_id)
    try:
        year = int(fields["PY"][0])
    except ValueError:
        return None, ParseIssue(
            end_line, f"non-integer PY value {fields['PY'][0]!r}", record_id
        )
    citation_count = 0
    if "TC" in fields and fields["TC"][0]:
        try:
            citation_count = int(fields["TC"][0])
        except ValueError:
            return None, ParseIssue(
                end_line, f"non-integer TC value {fields['TC'][0]!r}", record_id
            )
        if citation_count < 0:
            return None, ParseIssue(
                end_line, f"negative TC value {citation_count}", record_id
            )
    categories: list[str] = []
    for chunk in fields.get("SC", []):
        categories.extend(part.strip() for part in chunk.split(";") if part.strip())
    ft_parts = [part for part in fields.get("FT", []) if part]
    record = CorpusRecord(
        record_id=record_id,
        year=year,
        language=fields.get("LA", [""])[0],
        doc_type=fields.get("DT", [""])[0],
        categories=tuple(categories),
        ack_text=" ".join(ft_parts) if ft_parts else None,
        funding_orgs=tuple(v for v in fields.get("FO", []) if v),
        grant_numbers=tuple(v for v in fields.get("FG", []) if v),
        citation_count=citation_count,
    )
    return record, None


def serialize_field_tagged(records: Iterable[CorpusRecord]) -> str:
    """Render records back to the field-tagged format.

    The derived ``domain`` has no field tag and is not serialized; re-parsing
    the output reproduces the records as originally parsed.
    """
    lines: list[str] = []
    for record in records:
        lines.append(f"UT {record.record_id}")
        lines.append(f"PY {record.year}")
        if record.language:
            lines.append(f"LA {record.language}")
        if record.doc_type:
            lines.append(f"DT {record.doc_type}")
        if record.categories:
            lines.append(f"SC {'; '.join(record.categories)}")
        lines.append(f"TC {record.citation_count}")
        if record.ack_text is not None:
            lines.append(f"FT {record.ack_text}")
        _emit_multivalue(lines, "FO", record.funding_orgs)
        _emit_multivalue(lines, "FG", record.grant_numbers)
        lines.append("ER")
        lines.append("")
    return "\n".join(lines)


def _emit_multivalue(lines: list[str], tag: str, values: tuple[str, ...]) -> None:
    for i, value in enumerate(values):
        lines.append(f"{tag} {value}" if i == 0 else f"   {value}")


def write_corpus_jsonl(records: Iterable[CorpusRecord], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_dict(), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_corpus_jsonl(path: str | Path) -> list[CorpusRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(CorpusRecord.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{line_no}: bad corpus line: {exc}") from exc
    return records


class DomainMap:
    """Discipline-string to domain lookup, case-insensitive with collapsed
    internal whitespace."""

    def __init__(self, entries: Mapping[str, str]):
        self._entries: dict[str, str] = {}
        for discipline, domain in entries.items():
            if domain not in DOMAINS:
                raise CorpusError(
                    f"domain map: {discipline!r} maps to unknown domain {domain!r}"
                )
            self._entries[_normalize_discipline(discipline)] = domain

    def __len__(self) -> int:
        return len(self._entries)

    def lookup(self, discipline: str) -> str | None:
        return self._entries.get(_normalize_discipline(discipline))


def _normalize_discipline(value: str) -> str:
    return " ".join(value.split()).casefold()


def load_domain_map(path: str | Path) -> DomainMap:
    """Load a two-column CSV with header ``classification,domain``."""
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty domain map") from None
        if [h.strip().casefold() for h in header] != ["classification", "domain"]:
            raise CorpusError(
                f"{path}: expected header 'classification,domain', got {','.join(header)!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise CorpusError(f"{path}:{line_no}: expected 2 columns, got {len(row)}")
            entries[row[0].strip()] = row[1].strip()
    return DomainMap(entries)


def default_domain_map() -> DomainMap:
    """The discipline-to-domain table bundled with the package."""
    return load_domain_map(Path(__file__).parent / "data" / "domain_map.csv")


def map_disciplines(
    records: Iterable[CorpusRecord], domain_map: DomainMap
) -> list[CorpusRecord]:
    """Assign each record the domain of its first mapped category.

    Records whose categories all miss the map stay unassigned; that is a
    valid outcome, not an error.
    """
    mapped = []
    for record in records:
        domain = None
        for category in record.categories:
            domain = domain_map.lookup(category)
            if domain is not None:
                break
        mapped.append(replace(record, domain=domain))
    return mapped


@dataclass(frozen=True)
class CorpusFilter:
    """Restriction by year range, language, and document type.

    Language and doc-type comparison is case-insensitive to survive export
    inconsistencies ("Article" vs "article").
    """

    year_min: int
    year_max: int
    languages: frozenset[str]
    doc_types: frozenset[str]

    def __post_init__(self) -> None:
        if self.year_min > self.year_max:
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")
        if not self.languages or not self.doc_types:
            raise ValueError("languages and doc_types must be non-empty")
        object.__setattr__(self, "_languages_cf", frozenset(v.casefold() for v in self.languages))
        object.__setattr__(self, "_doc_types_cf", frozenset(v.casefold() for v in self.doc_types))

    def matches(self, record: CorpusRecord) -> bool:
        return (
            self.year_min <= record.year <= self.year_max
            and record.language.casefold() in self._languages_cf
            and record.doc_type.casefold() in self._doc_types_cf
            and record.domain is not None
        )


def filter_records(
    records: Iterable[CorpusRecord], corpus_filter: CorpusFilter
) -> list[CorpusRecord]:
    """Keep exactly the records matching year range, language, doc type, and
    having an assigned domain; order is preserved."""
    return [record for record in records if corpus_filter.matches(record)]


def sample_per_domain(
    records: Iterable[CorpusRecord], n: int, seed: int
) -> list[CorpusRecord]:
    """Draw up to ``n`` records per domain uniformly without replacement.

    Deterministic for a fixed seed: each domain uses its own derived
    generator, so the draw for one domain is independent of what the others
    contain. Domains short of ``n`` are returned whole in original order.
    """
    if n <= 0:
        raise ValueError(f"sample size must be positive, got {n}")
    by_domain: dict[str, list[CorpusRecord]] = {}
    for record in records:
        if record.domain is None:
            continue
        by_domain.setdefault(record.domain, []).append(record)
    sampled: list[CorpusRecord] = []
    for domain in DOMAINS:
        population = by_domain.get(domain, [])
        if not population:
            continue
        if n >= len(population):
            sampled.extend(population)
            continue
        rng = random.Random(derive_seed(seed, "sample_per_domain", domain))
        sampled.extend(rng.sample(population, n))
    return sampled


@dataclass(frozen=True)
class CoverageStats:
    """Per-domain funding-information coverage.

    Percentages are raw (unrounded) and ``None`` when their denominator is
    zero; rounding happens only at presentation time.
    """

    domain: str
    article_count: int
    with_ack_text: int
    with_funding_index: int
    pct_with_ack_text: float | None
    pct_of_those_with_funding_index: float | None


def coverage_stats(records: Iterable[CorpusRecord]) -> list[CoverageStats]:
    """Coverage per domain: share of records with an acknowledgement text,
    and, among those, share with an indexed funder or grant number."""
    counts: dict[str, list[int]] = {}
    for record in records:
        if record.domain is None:
            continue
        tally = counts.setdefault(record.domain, [0, 0, 0])
        tally[0] += 1
        if record.ack_text is not None:
            tally[1] += 1
            if record.funding_orgs or record.grant_numbers:
                tally[2] += 1
    stats = []
    for domain in DOMAINS:
        if domain not in counts:
            continue
        total, with_ack, with_index = counts[domain]
        stats.append(
            CoverageStats(
                domain=domain,
                article_count=total,
                with_ack_text=with_ack,
                with_funding_index=with_index,
                pct_with_ack_text=100 * with_ack / total if total else None,
                pct_of_those_with_funding_index=(
                    100 * with_index / with_ack if with_ack else None
                ),
            )
        )
    return stats
