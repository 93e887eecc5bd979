"""Acknowledgement mining toolkit.

Ingest field-tagged bibliographic exports, tag six categories of
acknowledged entities, disambiguate their writing variants, and compute the
full statistical analysis over the result. The :mod:`ackmine.cli` module
wires everything into one command-line pipeline.
"""

from .corpus import (
    DOMAINS,
    CorpusFilter,
    CorpusRecord,
    CoverageStats,
    DomainMap,
    ParseIssue,
    ParseResult,
    coverage_stats,
    filter_records,
    map_disciplines,
    parse_field_tagged,
    sample_per_domain,
    serialize_field_tagged,
)
from .disambig import (
    CanonicalEntity,
    Cluster,
    DisambiguationResult,
    Mention,
    OverrideRule,
    apply_overrides,
    canonicalize_against_gazetteer,
    cluster_corporations,
    disambiguate_pipeline,
    drop_short_entities,
    merge_misspellings,
)
from .fuzzy import levenshtein_distance, partial_ratio, similarity_ratio
from .gazetteer import Gazetteer, GazetteerEntry, load_gazetteer
from .stats import (
    AnovaResult,
    ChiSquareResult,
    ContingencyTable,
    CramersVResult,
    GroupSummary,
    PearsonMatrix,
    TrendPoint,
    chi_square_independence,
    cramers_v,
    frequency_by_type_domain,
    length_stats,
    mean_std_per_paper,
    one_way_anova,
    pearson_matrix,
    rank_frequency,
    top_k,
    yearly_trends,
)
from .tagging import (
    LABELS,
    EntityLabel,
    EntitySpan,
    EvaluationReport,
    evaluate_tagger,
    gazetteer_tag,
    import_external_tags,
    link_person_affiliation,
)
from .textmetrics import TextLength, count_words, split_sentences, text_length

__version__ = "0.1.0"
