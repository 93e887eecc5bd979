"""Corpus statistics: distributions, per-paper summaries, rankings, text
length trends, association tests, correlations, and ANOVA.

Association statistics on contingency tables are computed in exact rational
arithmetic before the final float conversion, which makes the documented
invariants (zero statistic for proportional rows, scale invariance of
Cramér's V) literally exact rather than approximate. Tail probabilities use
the native special functions in :mod:`ackmine.specialfuncs`.
"""

from __future__ import annotations

import math
import statistics as pystats
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .corpus import DOMAINS, CorpusRecord
from .disambig import CanonicalEntity
from .seeds import derive_seed
from .specialfuncs import chi_square_sf, f_distribution_sf
from .tagging import LABELS, EntityLabel, EntitySpan
from .textmetrics import DEFAULT_ABBREVIATIONS, count_words, split_sentences

LOW_EXPECTED_COUNT = 5.0

PEARSON_VARIABLES: tuple[str, ...] = (
    "citation_count",
    *(label.value for label in LABELS),
    "word_count",
    "sentence_count",
)


class StatisticsError(ValueError):
    """Raised when a statistical operation gets degenerate input."""


class DegenerateTableError(StatisticsError):
    """A contingency table has a zero row or column marginal."""


@dataclass(frozen=True)
class ContingencyTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.row_labels):
            raise StatisticsError("row count does not match row labels")
        for row in self.counts:
            if len(row) != len(self.col_labels):
                raise StatisticsError("column count does not match column labels")
            for cell in row:
                if cell < 0:
                    raise StatisticsError(f"negative cell count {cell}")

    @property
    def n(self) -> int:
        return sum(sum(row) for row in self.counts)

    def row_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    def col_totals(self) -> tuple[int, ...]:
        return tuple(sum(row[j] for row in self.counts) for j in range(len(self.col_labels)))

    def pruned(self) -> "ContingencyTable":
        """Copy without all-zero rows and columns."""
        keep_rows = [i for i, total in enumerate(self.row_totals()) if total > 0]
        keep_cols = [j for j, total in enumerate(self.col_totals()) if total > 0]
        return ContingencyTable(
            tuple(self.row_labels[i] for i in keep_rows),
            tuple(self.col_labels[j] for j in keep_cols),
            tuple(tuple(self.counts[i][j] for j in keep_cols) for i in keep_rows),
        )


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float
    min_expected: float
    low_expected: bool


@dataclass(frozen=True)
class CramersVResult:
    v: float
    dof: int


@dataclass(frozen=True)
class GroupSummary:
    domain: str
    label: EntityLabel
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class TrendPoint:
    domain: str
    year: int
    median: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class DomainLengthStats:
    domain: str
    median_sentences: float
    median_words: float
    n: int


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float
    dof_between: int
    dof_within: int
    p_value: float


@dataclass(frozen=True)
class PearsonMatrix:
    variables: tuple[str, ...]
    matrix: tuple[tuple[float, ...], ...]

    def value(self, var_a: str, var_b: str) -> float:
        return self.matrix[self.variables.index(var_a)][self.variables.index(var_b)]


def _validate_for_test(table: ContingencyTable) -> None:
    if len(table.row_labels) < 2 or len(table.col_labels) < 2:
        raise StatisticsError(
            f"need at least a 2x2 table, got {len(table.row_labels)}x{len(table.col_labels)}"
        )
    for label, total in zip(table.row_labels, table.row_totals()):
        if total == 0:
            raise DegenerateTableError(f"row {label!r} has zero total")
    for label, total in zip(table.col_labels, table.col_totals()):
        if total == 0:
            raise DegenerateTableError(f"column {label!r} has zero total")


def _chi_square_fraction(table: ContingencyTable) -> tuple[Fraction, Fraction]:
    """Exact chi-square statistic and minimum expected count."""
    row_totals = table.row_totals()
    col_totals = table.col_totals()
    n = table.n
    statistic = Fraction(0)
    min_expected_num: int | None = None
    for i, row in enumerate(table.counts):
        for j, observed in enumerate(row):
            expected_num = row_totals[i] * col_totals[j]  # expected = this / n
            # (o - E/n)^2 / (E/n) written with integer numerator/denominator
            statistic += Fraction((observed * n - expected_num) ** 2, expected_num * n)
            if min_expected_num is None or expected_num < min_expected_num:
                min_expected_num = expected_num
    return statistic, Fraction(min_expected_num, n)


def chi_square_independence(table: ContingencyTable) -> ChiSquareResult:
    """Pearson chi-square test of independence.

    ``low_expected`` flags tables with an expected cell count below 5, which
    the test tolerates but a careful reader should know about.
    """
    _validate_for_test(table)
    statistic_frac, min_expected_frac = _chi_square_fraction(table)
    dof = (len(table.row_labels) - 1) * (len(table.col_labels) - 1)
    statistic = float(statistic_frac)
    min_expected = float(min_expected_frac)
    return ChiSquareResult(
        statistic=statistic,
        dof=dof,
        p_value=chi_square_sf(statistic, dof),
        min_expected=min_expected,
        low_expected=min_expected < LOW_EXPECTED_COUNT,
    )


def cramers_v(table: ContingencyTable) -> CramersVResult:
    """Cramér's V effect size: sqrt((chi2/n) / min(rows-1, cols-1))."""
    _validate_for_test(table)
    statistic_frac, _ = _chi_square_fraction(table)
    m = min(len(table.row_labels) - 1, len(table.col_labels) - 1)
    ratio = statistic_frac / (table.n * m)
    return CramersVResult(v=math.sqrt(float(ratio)), dof=m)


def frequency_by_type_domain(entities: Iterable[CanonicalEntity]) -> ContingencyTable:
    """Mention counts per entity type and scientific domain (6 x 4).

    Counts under domains outside the four standard ones are ignored.
    """
    cells = {(label, domain): 0 for label in LABELS for domain in DOMAINS}
    for entity in entities:
        for domain, count in entity.per_domain_counts.items():
            if domain in DOMAINS:
                cells[(entity.label, domain)] += count
    return ContingencyTable(
        row_labels=tuple(label.value for label in LABELS),
        col_labels=DOMAINS,
        counts=tuple(
            tuple(cells[(label, domain)] for domain in DOMAINS) for label in LABELS
        ),
    )


def entity_domain_table(entities: Iterable[CanonicalEntity]) -> ContingencyTable:
    """Mention counts per canonical entity and domain (labels pooled)."""
    cells: dict[str, Counter] = {}
    for entity in entities:
        counter = cells.setdefault(entity.canonical, Counter())
        for domain, count in entity.per_domain_counts.items():
            if domain in DOMAINS:
                counter[domain] += count
    canonicals = tuple(sorted(cells))
    return ContingencyTable(
        row_labels=canonicals,
        col_labels=DOMAINS,
        counts=tuple(
            tuple(cells[c].get(domain, 0) for domain in DOMAINS) for c in canonicals
        ),
    )


def entity_label_table(entities: Iterable[CanonicalEntity]) -> ContingencyTable:
    """Mention counts per canonical entity and entity type."""
    cells: dict[str, Counter] = {}
    for entity in entities:
        cells.setdefault(entity.canonical, Counter())[entity.label] += entity.mention_count
    canonicals = tuple(sorted(cells))
    return ContingencyTable(
        row_labels=canonicals,
        col_labels=tuple(label.value for label in LABELS),
        counts=tuple(
            tuple(cells[c].get(label, 0) for label in LABELS) for c in canonicals
        ),
    )


def _span_counts(spans: Iterable[EntitySpan]) -> dict[tuple[str, EntityLabel], int]:
    counts: dict[tuple[str, EntityLabel], int] = {}
    for span in spans:
        key = (span.record_id, span.label)
        counts[key] = counts.get(key, 0) + 1
    return counts


def mean_std_per_paper(
    spans: Iterable[EntitySpan],
    corpus: Iterable[CorpusRecord],
    population: str = "present",
) -> list[GroupSummary]:
    """Mean and sample standard deviation of per-paper span counts for each
    (domain, label).

    ``population="present"`` averages over papers that have at least one
    span of the label (the reading used for the headline table);
    ``population="all"`` averages over every paper in the domain, counting
    zeros, so the two denominators can be compared side by side. Empty
    populations are omitted, not reported as zero.
    """
    if population not in ("present", "all"):
        raise ValueError(f"population must be 'present' or 'all', got {population!r}")
    counts = _span_counts(spans)
    records_by_domain: dict[str, list[str]] = {}
    for record in corpus:
        if record.domain is not None:
            records_by_domain.setdefault(record.domain, []).append(record.record_id)
    summaries = []
    for domain in DOMAINS:
        record_ids = records_by_domain.get(domain, [])
        for label in LABELS:
            if population == "present":
                values = [
                    counts[(rid, label)] for rid in record_ids if (rid, label) in counts
                ]
            else:
                values = [counts.get((rid, label), 0) for rid in record_ids]
            if not values:
                continue
            mean = math.fsum(values) / len(values)
            if len(values) == 1:
                std = 0.0
            else:
                std = math.sqrt(
                    math.fsum((v - mean) ** 2 for v in values) / (len(values) - 1)
                )
            summaries.append(GroupSummary(domain, label, mean, std, len(values)))
    return summaries


def _ranked_entities(
    entities: Iterable[CanonicalEntity],
    label: EntityLabel,
    domain: str | None,
) -> list[tuple[CanonicalEntity, int]]:
    ranked = []
    for entity in entities:
        if entity.label != label:
            continue
        count = (
            entity.per_domain_counts.get(domain, 0) if domain else entity.mention_count
        )
        if count > 0:
            ranked.append((entity, count))
    ranked.sort(key=lambda pair: (-pair[1], pair[0].canonical))
    return ranked


def top_k(
    entities: Iterable[CanonicalEntity],
    label: EntityLabel,
    domain: str | None = None,
    k: int = 30,
) -> list[tuple[CanonicalEntity, int]]:
    """The ``k`` most-mentioned entities of a label, within one domain or
    overall, with their counts. Ties order lexicographically."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _ranked_entities(entities, label, domain)[:k]


def rank_frequency(
    entities: Iterable[CanonicalEntity],
    label: EntityLabel,
    domain: str | None = None,
) -> list[tuple[int, int]]:
    """(rank, mention count) pairs in descending count order, 1-based,
    ready for log-log plotting. No fitting is performed."""
    return [
        (rank, count)
        for rank, (_, count) in enumerate(_ranked_entities(entities, label, domain), start=1)
    ]


def _text_lengths_by_domain(
    corpus: Iterable[CorpusRecord],
    abbreviations: Iterable[str],
) -> dict[str, list[tuple[int, int, int]]]:
    """Per-domain (year, sentence_count, word_count) for ack-bearing records."""
    guard = frozenset(abbreviations)
    by_domain: dict[str, list[tuple[int, int, int]]] = {}
    for record in corpus:
        if record.ack_text is None or record.domain is None:
            continue
        sentences = len(split_sentences(record.ack_text, guard))
        words = count_words(record.ack_text)
        by_domain.setdefault(record.domain, []).append((record.year, sentences, words))
    return by_domain


def length_stats(
    corpus: Iterable[CorpusRecord],
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> list[DomainLengthStats]:
    """Median sentence and word counts per domain over records with an
    acknowledgement text. Even-sized medians average the two central values."""
    by_domain = _text_lengths_by_domain(corpus, abbreviations)
    results = []
    for domain in DOMAINS:
        entries = by_domain.get(domain)
        if not entries:
            continue
        results.append(
            DomainLengthStats(
                domain=domain,
                median_sentences=float(pystats.median(e[1] for e in entries)),
                median_words=float(pystats.median(e[2] for e in entries)),
                n=len(entries),
            )
        )
    return results


def yearly_trends(
    corpus: Iterable[CorpusRecord],
    metric: str,
    resamples: int = 1000,
    seed: int = 0,
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> list[TrendPoint]:
    """Per-(domain, year) median of a length metric with a 95% bootstrap
    confidence interval (percentile method, seeded and deterministic).

    Groups with fewer than two records collapse the interval onto the
    median. The interval is widened, if needed, to contain the observed
    median.
    """
    if metric not in ("words", "sentences"):
        raise ValueError(f"metric must be 'words' or 'sentences', got {metric!r}")
    if resamples < 1:
        raise ValueError(f"resamples must be >= 1, got {resamples}")
    index = 2 if metric == "words" else 1
    by_domain = _text_lengths_by_domain(corpus, abbreviations)
    points = []
    for domain in DOMAINS:
        entries = by_domain.get(domain)
        if not entries:
            continue
        by_year: dict[int, list[int]] = {}
        for entry in entries:
            by_year.setdefault(entry[0], []).append(entry[index])
        for year in sorted(by_year):
            values = by_year[year]
            median = float(pystats.median(values))
            if len(values) < 2:
                points.append(TrendPoint(domain, year, median, median, median))
                continue
            rng = np.random.default_rng(
                derive_seed(seed, "yearly_trends", metric, domain, str(year))
            )
            arr = np.asarray(values, dtype=float)
            indices = rng.integers(0, len(arr), size=(resamples, len(arr)))
            boot_medians = np.median(arr[indices], axis=1)
            ci_low, ci_high = np.percentile(boot_medians, [2.5, 97.5])
            points.append(
                TrendPoint(
                    domain,
                    year,
                    median,
                    min(float(ci_low), median),
                    max(float(ci_high), median),
                )
            )
    return points


def pearson_correlation(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson's r; NaN when either input has zero variance."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise StatisticsError("need at least 2 observations for a correlation")
    n = len(x)
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    sxy = math.fsum((xi - mean_x) * (yi - mean_y) for xi, yi in zip(x, y))
    sxx = math.fsum((xi - mean_x) ** 2 for xi in x)
    syy = math.fsum((yi - mean_y) ** 2 for yi in y)
    if sxx == 0.0 or syy == 0.0:
        return math.nan
    return sxy / math.sqrt(sxx * syy)


def assemble_record_variables(
    corpus: Iterable[CorpusRecord],
    spans: Iterable[EntitySpan],
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> tuple[tuple[str, ...], list[list[float]]]:
    """Per-record vectors for the correlation variables, over records with
    an acknowledgement text: citation count, per-label span counts, word
    count, sentence count."""
    counts = _span_counts(spans)
    guard = frozenset(abbreviations)
    columns: list[list[float]] = [[] for _ in PEARSON_VARIABLES]
    for record in corpus:
        if record.ack_text is None:
            continue
        row = [
            float(record.citation_count),
            *(float(counts.get((record.record_id, label), 0)) for label in LABELS),
            float(count_words(record.ack_text)),
            float(len(split_sentences(record.ack_text, guard))),
        ]
        for column, value in zip(columns, row):
            column.append(value)
    return PEARSON_VARIABLES, columns


def pearson_matrix(
    corpus: Iterable[CorpusRecord],
    spans: Iterable[EntitySpan],
    normalize: bool = True,
    abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
) -> PearsonMatrix:
    """Symmetric correlation matrix over the record variables.

    ``normalize`` z-scores each variable first; Pearson's r is invariant
    under that transform, so both settings agree to floating-point noise.
    Zero-variance variables yield NaN rows and columns.
    """
    variables, columns = assemble_record_variables(corpus, spans, abbreviations)
    if not columns[0] or len(columns[0]) < 2:
        raise StatisticsError("need at least 2 ack-bearing records for correlations")
    if normalize:
        columns = [_zscore(column) for column in columns]
    size = len(variables)
    matrix = [[math.nan] * size for _ in range(size)]
    for i in range(size):
        for j in range(i, size):
            r = pearson_correlation(columns[i], columns[j])
            matrix[i][j] = r
            matrix[j][i] = r
    return PearsonMatrix(variables, tuple(tuple(row) for row in matrix))


def _zscore(values: Sequence[float]) -> list[float]:
    n = len(values)
    mean = math.fsum(values) / n
    variance = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    if variance == 0.0:
        # Leave the degenerate column centered; correlations on it are NaN.
        return [v - mean for v in values]
    std = math.sqrt(variance)
    return [(v - mean) / std for v in values]


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """One-way analysis of variance across the given groups.

    F is NaN when both between- and within-group variation vanish, and
    infinite (p = 0) for perfectly separated groups with no within-group
    variation.
    """
    if len(groups) < 2:
        raise StatisticsError(f"need at least 2 groups, got {len(groups)}")
    if any(len(group) < 1 for group in groups):
        raise StatisticsError("every group needs at least one value")
    k = len(groups)
    n = sum(len(group) for group in groups)
    if n <= k:
        raise StatisticsError(f"need more observations ({n}) than groups ({k})")
    grand_mean = math.fsum(math.fsum(group) for group in groups) / n
    group_means = [math.fsum(group) / len(group) for group in groups]
    ss_between = math.fsum(
        len(group) * (mean - grand_mean) ** 2 for group, mean in zip(groups, group_means)
    )
    ss_within = math.fsum(
        math.fsum((value - mean) ** 2 for value in group)
        for group, mean in zip(groups, group_means)
    )
    dof_between = k - 1
    dof_within = n - k
    if ss_within == 0.0 and ss_between == 0.0:
        return AnovaResult(math.nan, dof_between, dof_within, math.nan)
    if ss_within == 0.0:
        return AnovaResult(math.inf, dof_between, dof_within, 0.0)
    f_statistic = (ss_between / dof_between) / (ss_within / dof_within)
    return AnovaResult(
        f_statistic,
        dof_between,
        dof_within,
        f_distribution_sf(f_statistic, dof_between, dof_within),
    )
