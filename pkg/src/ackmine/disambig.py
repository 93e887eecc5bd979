"""Entity disambiguation: collapse writing variants of one real-world entity
into a canonical form.

The pipeline runs five stages in a fixed order: gazetteer canonicalization
(FUND and MISC against the funding gazetteer, UNI against the university
gazetteer), corporation clustering by partial ratio, per-label misspelling
merging, removal of too-short individuals and grant numbers, and manual
label overrides. Merging uses single-link connected components, so the sum
of cluster mention counts always equals the number of surviving mentions.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .fuzzy import partial_ratio, ratio_length_bound, similarity_ratio
from .gazetteer import Gazetteer
from .tagging import LABELS, EntityLabel, EntitySpan

logger = logging.getLogger(__name__)

NAME_THRESHOLD = 93
ABBREV_THRESHOLD = 99
COR_PARTIAL_THRESHOLD = 96
MISSPELLING_THRESHOLD = 90
MIN_SURFACE_CHARS = 4
SHORT_DROP_LABELS = frozenset({EntityLabel.IND, EntityLabel.GRNB})


class OverrideError(ValueError):
    """Raised when override rules conflict or fail validation."""


@dataclass(frozen=True)
class Mention:
    """One occurrence of an entity, tracked through the pipeline.

    ``surface`` is rewritten as stages canonicalize it; ``original`` keeps
    the surface the tagger saw.
    """

    surface: str
    label: EntityLabel
    domain: str
    original: str

    @classmethod
    def new(cls, surface: str, label: EntityLabel, domain: str) -> "Mention":
        return cls(surface=surface, label=label, domain=domain, original=surface)


@dataclass(frozen=True)
class OverrideRule:
    surface: str
    from_label: EntityLabel
    to_label: EntityLabel

    def __post_init__(self) -> None:
        if self.from_label == self.to_label:
            raise OverrideError(
                f"override for {self.surface!r} maps {self.from_label} to itself"
            )


@dataclass(frozen=True)
class Cluster:
    """Surfaces merged into one entity, with per-surface mention counts."""

    canonical: str
    member_counts: tuple[tuple[str, int], ...]

    @property
    def mention_count(self) -> int:
        return sum(count for _, count in self.member_counts)

    @property
    def members(self) -> tuple[str, ...]:
        return tuple(surface for surface, _ in self.member_counts)


@dataclass(frozen=True)
class CanonicalEntity:
    canonical: str
    label: EntityLabel
    members: tuple[str, ...]
    mention_count: int
    per_domain_counts: Mapping[str, int]

    def to_json_dict(self) -> dict:
        return {
            "canonical": self.canonical,
            "label": self.label.value,
            "members": list(self.members),
            "mention_count": self.mention_count,
            "per_domain_counts": dict(sorted(self.per_domain_counts.items())),
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "CanonicalEntity":
        return cls(
            canonical=data["canonical"],
            label=EntityLabel(data["label"]),
            members=tuple(data["members"]),
            mention_count=data["mention_count"],
            per_domain_counts=dict(data["per_domain_counts"]),
        )


@dataclass
class DisambiguationResult:
    entities: list[CanonicalEntity]
    input_mentions: int
    dropped_mentions: int

    @property
    def aggregated_mentions(self) -> int:
        return sum(entity.mention_count for entity in self.entities)


class UnionFind:
    """Disjoint sets with path compression and union by size."""

    def __init__(self, items: Iterable[str]):
        self.parent = {item: item for item in items}
        self.size = {item: 1 for item in self.parent}

    def find(self, item: str) -> str:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def components(self) -> list[list[str]]:
        groups: dict[str, list[str]] = {}
        for item in self.parent:
            groups.setdefault(self.find(item), []).append(item)
        return list(groups.values())


def canonicalize_against_gazetteer(
    mentions: Sequence[Mention],
    gazetteer: Gazetteer,
    labels: frozenset[EntityLabel],
    name_threshold: int = NAME_THRESHOLD,
    abbrev_threshold: int = ABBREV_THRESHOLD,
) -> list[Mention]:
    """Rewrite surfaces that fuzzily match a gazetteer entry.

    A surface whose best similarity ratio against an entry's full name
    exceeds ``name_threshold`` is replaced by that entry's disambiguated
    form; failing that, an abbreviation match above ``abbrev_threshold``
    (in practice: an exact, case-sensitive hit) rewrites it. Everything else
    passes through unchanged. Ties go to the earliest entry in file order.
    """
    if not gazetteer:
        logger.warning("empty gazetteer: surfaces for %s pass through unchanged",
                       ",".join(sorted(label.value for label in labels)))
        return list(mentions)
    rewrite_cache: dict[str, str] = {}

    def rewrite(surface: str) -> str:
        if surface in rewrite_cache:
            return rewrite_cache[surface]
        result = surface
        if surface in gazetteer.disambiguated_forms:
            # Already a canonical form; rewriting could only churn.
            rewrite_cache[surface] = surface
            return surface
        best_score, best_form = -1, None
        for entry in gazetteer.entries:
            if ratio_length_bound(len(surface), len(entry.text)) <= name_threshold:
                continue
            score = similarity_ratio(surface, entry.text)
            if score > best_score:
                best_score, best_form = score, entry.disambiguated_form
        if best_score > name_threshold:
            result = best_form
        else:
            best_score, best_form = -1, None
            for abbrev, entry in gazetteer.abbreviation_index:
                if ratio_length_bound(len(surface), len(abbrev)) <= abbrev_threshold:
                    continue
                score = similarity_ratio(surface, abbrev)
                if score > best_score:
                    best_score, best_form = score, entry.disambiguated_form
            if best_score > abbrev_threshold:
                result = best_form
        rewrite_cache[surface] = result
        return result

    return [
        replace(m, surface=rewrite(m.surface)) if m.label in labels else m
        for m in mentions
    ]


def _pick_canonical(component: Iterable[str], counts: Mapping[str, int]) -> str:
    # Most frequent member; ties fall to the lexicographically smallest.
    return min(component, key=lambda surface: (-counts[surface], surface))


def _clusters_from_components(
    components: Iterable[Iterable[str]], counts: Mapping[str, int]
) -> list[Cluster]:
    clusters = []
    for component in components:
        members = sorted(component)
        canonical = _pick_canonical(members, counts)
        clusters.append(
            Cluster(canonical, tuple((m, counts[m]) for m in members))
        )
    clusters.sort(key=lambda c: c.canonical)
    return clusters


def cluster_corporations(
    surface_counts: Mapping[str, int], threshold: int = COR_PARTIAL_THRESHOLD
) -> list[Cluster]:
    """Single-link clusters of corporation surfaces under partial ratio.

    An edge joins two distinct surfaces when their partial ratio exceeds
    ``threshold``; connected components become clusters. The canonical form
    is the most frequent member (lexicographic tie-break).
    """
    surfaces = sorted(surface_counts)
    uf = UnionFind(surfaces)
    for i, a in enumerate(surfaces):
        for b in surfaces[i + 1 :]:
            if partial_ratio(a, b) > threshold:
                uf.union(a, b)
    return _clusters_from_components(uf.components(), surface_counts)


def merge_misspellings(
    counts_by_label: Mapping[EntityLabel, Mapping[str, int]],
    threshold: int = MISSPELLING_THRESHOLD,
) -> dict[EntityLabel, list[Cluster]]:
    """Merge near-identical surfaces within each label.

    Labels other than IND use single-link clustering over similarity ratio
    strictly above ``threshold``. IND surfaces merge only when their ratio
    is exactly 100 under case-insensitive comparison, i.e. they differ only
    in letter case.
    """
    clusters_by_label: dict[EntityLabel, list[Cluster]] = {}
    for label, counts in counts_by_label.items():
        if label == EntityLabel.IND:
            groups: dict[str, list[str]] = {}
            for surface in counts:
                groups.setdefault(surface.lower(), []).append(surface)
            components = [sorted(group) for group in groups.values()]
            clusters_by_label[label] = _clusters_from_components(components, counts)
            continue
        surfaces = sorted(counts)
        uf = UnionFind(surfaces)
        for i, a in enumerate(surfaces):
            for b in surfaces[i + 1 :]:
                # Length gap alone can cap the ratio below the threshold.
                if ratio_length_bound(len(a), len(b)) <= threshold:
                    continue
                if similarity_ratio(a, b) > threshold:
                    uf.union(a, b)
        clusters_by_label[label] = _clusters_from_components(uf.components(), counts)
    return clusters_by_label


def drop_short_entities(
    mentions: Sequence[Mention],
    labels: frozenset[EntityLabel] = SHORT_DROP_LABELS,
    min_chars: int = MIN_SURFACE_CHARS,
) -> list[Mention]:
    """Remove mentions of the given labels whose surface, spaces included,
    is shorter than ``min_chars`` characters."""
    return [
        m for m in mentions if m.label not in labels or len(m.surface) >= min_chars
    ]


def apply_overrides(
    mentions: Sequence[Mention], rules: Sequence[OverrideRule]
) -> list[Mention]:
    """Relabel mentions whose surface and label exactly match a rule.

    The total mention count is preserved; only labels move.
    """
    _check_override_conflicts(rules)
    by_key = {(rule.surface, rule.from_label): rule.to_label for rule in rules}
    return [
        replace(m, label=by_key[(m.surface, m.label)])
        if (m.surface, m.label) in by_key
        else m
        for m in mentions
    ]


def _check_override_conflicts(rules: Sequence[OverrideRule]) -> None:
    seen: dict[tuple[str, EntityLabel], EntityLabel] = {}
    for rule in rules:
        key = (rule.surface, rule.from_label)
        if key in seen and seen[key] != rule.to_label:
            raise OverrideError(
                f"conflicting overrides for {rule.surface!r} from {rule.from_label}: "
                f"{seen[key]} vs {rule.to_label}"
            )
        seen[key] = rule.to_label


def load_overrides(path: str | Path) -> list[OverrideRule]:
    """Load override rules from a CSV with header ``surface,from_label,to_label``."""
    rules = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise OverrideError(f"{path}: empty overrides file") from None
        if [h.strip().casefold() for h in header] != ["surface", "from_label", "to_label"]:
            raise OverrideError(
                f"{path}: expected header 'surface,from_label,to_label', got {','.join(header)!r}"
            )
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 3:
                raise OverrideError(f"{path}:{line_no}: expected 3 columns")
            surface, from_raw, to_raw = (cell.strip() for cell in row)
            try:
                rules.append(
                    OverrideRule(surface, EntityLabel(from_raw), EntityLabel(to_raw))
                )
            except ValueError as exc:
                raise OverrideError(f"{path}:{line_no}: {exc}") from exc
    _check_override_conflicts(rules)
    return rules


def disambiguate_pipeline(
    spans: Sequence[EntitySpan],
    domain_by_record: Mapping[str, str | None],
    fund_gazetteer: Gazetteer,
    uni_gazetteer: Gazetteer,
    overrides: Sequence[OverrideRule] = (),
    name_threshold: int = NAME_THRESHOLD,
    abbrev_threshold: int = ABBREV_THRESHOLD,
    cor_partial_threshold: int = COR_PARTIAL_THRESHOLD,
    misspelling_threshold: int = MISSPELLING_THRESHOLD,
    min_chars: int = MIN_SURFACE_CHARS,
) -> DisambiguationResult:
    """Run the full disambiguation over tagged spans and aggregate the
    surviving mentions into canonical entities with per-domain counts."""
    mentions = [
        Mention.new(
            span.surface,
            span.label,
            domain_by_record.get(span.record_id) or "unassigned",
        )
        for span in spans
    ]
    input_count = len(mentions)

    mentions = canonicalize_against_gazetteer(
        mentions,
        fund_gazetteer,
        frozenset({EntityLabel.FUND, EntityLabel.MISC}),
        name_threshold,
        abbrev_threshold,
    )
    mentions = canonicalize_against_gazetteer(
        mentions,
        uni_gazetteer,
        frozenset({EntityLabel.UNI}),
        name_threshold,
        abbrev_threshold,
    )

    cor_counts = Counter(m.surface for m in mentions if m.label == EntityLabel.COR)
    if cor_counts:
        cor_canonical = _canonical_map(cluster_corporations(cor_counts, cor_partial_threshold))
        mentions = [
            replace(m, surface=cor_canonical[m.surface])
            if m.label == EntityLabel.COR
            else m
            for m in mentions
        ]

    counts_by_label: dict[EntityLabel, Counter] = {}
    for m in mentions:
        counts_by_label.setdefault(m.label, Counter())[m.surface] += 1
    canonical_by_label = {
        label: _canonical_map(clusters)
        for label, clusters in merge_misspellings(counts_by_label, misspelling_threshold).items()
    }
    mentions = [
        replace(m, surface=canonical_by_label[m.label][m.surface]) for m in mentions
    ]

    mentions = drop_short_entities(mentions, SHORT_DROP_LABELS, min_chars)
    dropped = input_count - len(mentions)

    mentions = apply_overrides(mentions, overrides)

    grouped: dict[tuple[EntityLabel, str], list[Mention]] = {}
    for m in mentions:
        grouped.setdefault((m.label, m.surface), []).append(m)
    label_order = {label: i for i, label in enumerate(LABELS)}
    entities = []
    for (label, surface), group in sorted(
        grouped.items(), key=lambda kv: (label_order[kv[0][0]], kv[0][1])
    ):
        per_domain = Counter(m.domain for m in group)
        entities.append(
            CanonicalEntity(
                canonical=surface,
                label=label,
                members=tuple(sorted({m.original for m in group})),
                mention_count=len(group),
                per_domain_counts=dict(sorted(per_domain.items())),
            )
        )
    return DisambiguationResult(entities, input_count, dropped)


def _canonical_map(clusters: Iterable[Cluster]) -> dict[str, str]:
    mapping = {}
    for cluster in clusters:
        for member in cluster.members:
            mapping[member] = cluster.canonical
    return mapping


def write_entities_jsonl(entities: Iterable[CanonicalEntity], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for entity in entities:
            handle.write(json.dumps(entity.to_json_dict(), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_entities_jsonl(path: str | Path) -> list[CanonicalEntity]:
    entities = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entities.append(CanonicalEntity.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{line_no}: bad entity line: {exc}") from exc
    return entities
