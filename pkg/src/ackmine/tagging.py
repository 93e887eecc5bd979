"""Entity tagging over acknowledgement texts.

Two sources of spans: a deterministic gazetteer/heuristic baseline, and an
import path for tags produced by an external model. Both yield the same
validated span type, so the rest of the pipeline does not care which tagger
ran. Offsets count Unicode code points into the record's acknowledgement
text.
"""

from __future__ import annotations

import enum
import io
import json
import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CorpusRecord
from .gazetteer import Gazetteer


class EntityLabel(str, enum.Enum):
    """The six acknowledged-entity categories. Closed set: nothing else is
    accepted anywhere in the pipeline."""

    FUND = "FUND"
    GRNB = "GRNB"
    IND = "IND"
    COR = "COR"
    UNI = "UNI"
    MISC = "MISC"

    def __str__(self) -> str:  # json/csv friendliness
        return self.value


LABELS: tuple[EntityLabel, ...] = (
    EntityLabel.FUND,
    EntityLabel.GRNB,
    EntityLabel.IND,
    EntityLabel.COR,
    EntityLabel.UNI,
    EntityLabel.MISC,
)

# Higher-precedence labels keep their spans when candidates overlap.
_OVERLAP_PRECEDENCE: tuple[EntityLabel, ...] = (
    EntityLabel.FUND,
    EntityLabel.UNI,
    EntityLabel.COR,
    EntityLabel.GRNB,
    EntityLabel.IND,
)

GRANT_CUES = frozenset(
    {"grant", "grants", "award", "project", "contract", "no.", "nos.", "number"}
)
GRANT_CUE_WINDOW = 6
PERSON_CUES = frozenset({"thank", "thanks", "grateful", "acknowledge", "indebted"})
PERSON_CUE_WINDOW = 4

_TOKEN_RE = re.compile(r"\S+")
_EDGE_PUNCT = string.punctuation + "…‘’“”–—"
_NAME_TOKEN_RE = re.compile(r"^[A-Z][a-z]+(?:[-'][A-Z][a-z]+)*$")
_INITIAL_TOKEN_RE = re.compile(r"^[A-Z]\.$")


@dataclass(frozen=True, order=True)
class EntitySpan:
    """One tagged mention: a half-open character range in a record's
    acknowledgement text."""

    record_id: str
    start: int
    end: int
    surface: str
    label: EntityLabel

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(
                f"span {self.record_id}[{self.start}:{self.end}]: invalid range"
            )

    def overlaps(self, other: "EntitySpan") -> bool:
        return (
            self.record_id == other.record_id
            and self.start < other.end
            and other.start < self.end
        )

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "start": self.start,
            "end": self.end,
            "text": self.surface,
            "label": self.label.value,
        }


class TagValidationError(ValueError):
    """Raised when a span set cannot be validated against its corpus."""


@dataclass(frozen=True)
class ImportIssue:
    line_no: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}"


@dataclass
class ImportResult:
    spans: list[EntitySpan]
    issues: list[ImportIssue]


@dataclass(frozen=True)
class LabelScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvaluationReport:
    per_label: Mapping[EntityLabel, LabelScores]
    accuracy: float


@dataclass(frozen=True)
class _Token:
    start: int
    end: int
    text: str

    @property
    def core(self) -> str:
        return self.text.strip(_EDGE_PUNCT)

    @property
    def core_span(self) -> tuple[int, int]:
        lead = len(self.text) - len(self.text.lstrip(_EDGE_PUNCT))
        core = self.core
        return self.start + lead, self.start + lead + len(core)


def _tokenize(text: str) -> list[_Token]:
    return [_Token(m.start(), m.end(), m.group()) for m in _TOKEN_RE.finditer(text)]


def _normalize_cue(token: _Token) -> tuple[str, str]:
    """Two lowercase views of a token for cue matching: edge punctuation
    stripped except trailing periods, and additionally without them."""
    lowered = token.text.lower()
    keep_period = lowered.strip(_EDGE_PUNCT.replace(".", ""))
    return keep_period, keep_period.rstrip(".")


def gazetteer_tag(
    record: CorpusRecord,
    fund_gazetteer: Gazetteer,
    uni_gazetteer: Gazetteer,
    cor_gazetteer: Gazetteer,
) -> list[EntitySpan]:
    """Deterministic baseline tagger.

    Candidates come from three sources: gazetteer string matches (FUND, UNI,
    COR), a grant-number heuristic (digit-bearing tokens near a grant cue),
    and a person heuristic (short capitalized runs near a gratitude cue).
    Overlaps are resolved by label precedence FUND > UNI > COR > GRNB > IND,
    then leftmost-longest within a label.
    """
    if record.ack_text is None:
        raise TagValidationError(f"record {record.record_id} has no acknowledgement text")
    text = record.ack_text
    tokens = _tokenize(text)
    gazetteers = (
        (EntityLabel.FUND, fund_gazetteer),
        (EntityLabel.UNI, uni_gazetteer),
        (EntityLabel.COR, cor_gazetteer),
    )
    known_forms: set[str] = set()
    candidates: dict[EntityLabel, list[tuple[int, int]]] = {label: [] for label in LABELS}
    for label, gazetteer in gazetteers:
        forms = gazetteer.matchable_forms()
        known_forms.update(forms)
        for form in forms:
            for start in _find_word_bounded(text, form):
                candidates[label].append((start, start + len(form)))
    candidates[EntityLabel.GRNB] = _grant_number_candidates(tokens)
    candidates[EntityLabel.IND] = _person_candidates(text, tokens, known_forms)

    selected: list[tuple[int, int, EntityLabel]] = []
    for label in _OVERLAP_PRECEDENCE:
        for start, end in sorted(candidates[label], key=lambda c: (c[0], c[0] - c[1])):
            if all(end <= s or e <= start for s, e, _ in selected):
                selected.append((start, end, label))
    selected.sort()
    return [
        EntitySpan(record.record_id, start, end, text[start:end], label)
        for start, end, label in selected
    ]


def _find_word_bounded(text: str, needle: str) -> list[int]:
    """All occurrences of ``needle`` whose neighbours are not alphanumeric."""
    if not needle:
        return []
    positions = []
    start = text.find(needle)
    while start != -1:
        end = start + len(needle)
        before_ok = start == 0 or not text[start - 1].isalnum()
        after_ok = end == len(text) or not text[end].isalnum()
        if before_ok and after_ok:
            positions.append(start)
        start = text.find(needle, start + 1)
    return positions


def _grant_number_candidates(tokens: Sequence[_Token]) -> list[tuple[int, int]]:
    spans = []
    cue_indices = [
        i for i, tok in enumerate(tokens) if any(v in GRANT_CUES for v in _normalize_cue(tok))
    ]
    taken: set[int] = set()
    for cue_index in cue_indices:
        for i in range(cue_index + 1, min(cue_index + 1 + GRANT_CUE_WINDOW, len(tokens))):
            if i in taken:
                continue
            token = tokens[i]
            core = token.core
            if len(core) >= 4 and any(ch.isdigit() for ch in core):
                spans.append(token.core_span)
                taken.add(i)
    return spans


def _name_token_span(token: _Token) -> tuple[int, int] | None:
    """The in-token span of a capitalized name or a single-letter initial.

    Tokens opening with punctuation (e.g. "(Norwegian") do not qualify:
    a parenthetical starts a new phrase, not a continuation of the name.
    """
    if token.text[0] in _EDGE_PUNCT:
        return None
    # Initials keep their period: "J." but not a bare "J".
    kept = token.text.rstrip(_EDGE_PUNCT.replace(".", "")).rstrip()
    if _INITIAL_TOKEN_RE.match(kept):
        return token.start, token.start + len(kept)
    core = token.core
    if _NAME_TOKEN_RE.match(core):
        return token.start, token.start + len(core)
    return None


def _person_candidates(
    text: str, tokens: Sequence[_Token], known_forms: set[str]
) -> list[tuple[int, int]]:
    cue_indices = {
        i for i, tok in enumerate(tokens) if any(v in PERSON_CUES for v in _normalize_cue(tok))
    }
    name_spans = [_name_token_span(token) for token in tokens]
    spans = []
    i = 0
    while i < len(tokens):
        if name_spans[i] is None:
            i += 1
            continue
        run_start = i
        while i < len(tokens) and name_spans[i] is not None:
            i += 1
        run_len = i - run_start
        if not 2 <= run_len <= 4:
            continue
        if not any(c in cue_indices for c in range(max(0, run_start - PERSON_CUE_WINDOW), run_start)):
            continue
        start = name_spans[run_start][0]
        end = name_spans[i - 1][1]
        if text[start:end] in known_forms:
            continue
        spans.append((start, end))
    return spans


def import_external_tags(
    stream: Iterable[str] | io.TextIOBase | str,
    corpus: Iterable[CorpusRecord],
) -> ImportResult:
    """Validate tag-interchange lines against the corpus.

    Each line is a JSON object ``{record_id, start, end, text, label}``.
    Bad lines are collected with their line numbers and skipped; a span
    overlapping an already-accepted span of the same record is rejected with
    an error naming both spans.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    by_id = {record.record_id: record for record in corpus}
    accepted: list[EntitySpan] = []
    per_record: dict[str, list[EntitySpan]] = {}
    issues: list[ImportIssue] = []
    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        result = _validate_tag_line(line, by_id, per_record)
        if isinstance(result, ImportIssue):
            issues.append(ImportIssue(line_no, result.message))
            continue
        accepted.append(result)
        per_record.setdefault(result.record_id, []).append(result)
    return ImportResult(accepted, issues)


def _validate_tag_line(
    line: str,
    by_id: Mapping[str, CorpusRecord],
    per_record: Mapping[str, list[EntitySpan]],
) -> EntitySpan | ImportIssue:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        return ImportIssue(0, f"invalid JSON: {exc}")
    if not isinstance(data, dict):
        return ImportIssue(0, "line is not a JSON object")
    missing = [k for k in ("record_id", "start", "end", "text", "label") if k not in data]
    if missing:
        return ImportIssue(0, f"missing keys: {', '.join(missing)}")
    record_id = data["record_id"]
    record = by_id.get(record_id)
    if record is None:
        return ImportIssue(0, f"unknown record_id {record_id!r}")
    if record.ack_text is None:
        return ImportIssue(0, f"record {record_id!r} has no acknowledgement text")
    try:
        label = EntityLabel(data["label"])
    except ValueError:
        return ImportIssue(0, f"unknown label {data['label']!r}")
    start, end = data["start"], data["end"]
    if not (isinstance(start, int) and isinstance(end, int)):
        return ImportIssue(0, f"offsets must be integers, got {start!r}, {end!r}")
    if not (0 <= start < end <= len(record.ack_text)):
        return ImportIssue(
            0,
            f"offsets [{start}:{end}] out of range for record {record_id!r} "
            f"(text length {len(record.ack_text)})",
        )
    slice_text = record.ack_text[start:end]
    if data["text"] != slice_text:
        return ImportIssue(
            0,
            f"surface mismatch in record {record_id!r}: line says {data['text']!r}, "
            f"text slice [{start}:{end}] is {slice_text!r}",
        )
    span = EntitySpan(record_id, start, end, slice_text, label)
    for existing in per_record.get(record_id, ()):
        if span.overlaps(existing):
            return ImportIssue(
                0,
                f"span {span.surface!r}[{span.start}:{span.end}] overlaps accepted span "
                f"{existing.surface!r}[{existing.start}:{existing.end}] in record {record_id!r}",
            )
    return span


def validate_spans(spans: Iterable[EntitySpan], corpus: Iterable[CorpusRecord]) -> None:
    """Strict validation: raises on the first offence instead of collecting."""
    by_id = {record.record_id: record for record in corpus}
    per_record: dict[str, list[EntitySpan]] = {}
    for span in spans:
        record = by_id.get(span.record_id)
        if record is None:
            raise TagValidationError(f"span references unknown record {span.record_id!r}")
        if record.ack_text is None or span.end > len(record.ack_text):
            raise TagValidationError(
                f"span {span.record_id}[{span.start}:{span.end}] exceeds text bounds"
            )
        if record.ack_text[span.start : span.end] != span.surface:
            raise TagValidationError(
                f"span {span.record_id}[{span.start}:{span.end}]: surface {span.surface!r} "
                f"does not match slice {record.ack_text[span.start:span.end]!r}"
            )
        for existing in per_record.get(span.record_id, ()):
            if span.overlaps(existing):
                raise TagValidationError(
                    f"overlapping spans in record {span.record_id!r}: "
                    f"{existing.surface!r}[{existing.start}:{existing.end}] and "
                    f"{span.surface!r}[{span.start}:{span.end}]"
                )
        per_record.setdefault(span.record_id, []).append(span)


def evaluate_tagger(
    predicted: Iterable[EntitySpan], gold: Iterable[EntitySpan]
) -> EvaluationReport:
    """Exact-match evaluation: a prediction is a true positive iff an
    identical (record, range, label) gold span exists.

    Accuracy is the arithmetic mean of per-label F1 over the labels present
    in gold or predictions; with neither, it is vacuously 1.0.
    """
    pred_keys = {(s.record_id, s.start, s.end, s.label) for s in predicted}
    gold_keys = {(s.record_id, s.start, s.end, s.label) for s in gold}
    labels = {key[3] for key in pred_keys} | {key[3] for key in gold_keys}
    per_label: dict[EntityLabel, LabelScores] = {}
    for label in LABELS:
        if label not in labels:
            continue
        pred_l = {k for k in pred_keys if k[3] == label}
        gold_l = {k for k in gold_keys if k[3] == label}
        tp = len(pred_l & gold_l)
        precision = tp / len(pred_l) if pred_l else 0.0
        recall = tp / len(gold_l) if gold_l else 0.0
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        per_label[label] = LabelScores(precision, recall, f1)
    if per_label:
        accuracy = sum(s.f1 for s in per_label.values()) / len(per_label)
    else:
        accuracy = 1.0
    return EvaluationReport(per_label, accuracy)


def link_person_affiliation(
    spans: Iterable[EntitySpan], window: int = 60
) -> list[tuple[EntitySpan, EntitySpan | None]]:
    """Pair each IND span with its nearest UNI or COR span in the same record.

    Distance is the character gap between the spans; candidates farther than
    ``window`` stay unpaired. Equidistant candidates resolve to the one
    following the person.
    """
    by_record: dict[str, list[EntitySpan]] = {}
    for span in spans:
        by_record.setdefault(span.record_id, []).append(span)
    pairs: list[tuple[EntitySpan, EntitySpan | None]] = []
    for record_id in sorted(by_record):
        record_spans = sorted(by_record[record_id])
        persons = [s for s in record_spans if s.label == EntityLabel.IND]
        places = [
            s for s in record_spans if s.label in (EntityLabel.UNI, EntityLabel.COR)
        ]
        for person in persons:
            best: EntitySpan | None = None
            best_key: tuple[int, int] | None = None
            for place in places:
                if place.start >= person.end:
                    gap, side = place.start - person.end, 0  # rightward wins ties
                else:
                    gap, side = person.start - place.end, 1
                if gap > window:
                    continue
                key = (gap, side)
                if best_key is None or key < best_key:
                    best, best_key = place, key
            pairs.append((person, best))
    return pairs


def write_spans_jsonl(spans: Iterable[EntitySpan], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for span in spans:
            handle.write(json.dumps(span.to_json_dict(), ensure_ascii=False))
            handle.write("\n")
            count += 1
    return count


def read_spans_jsonl(path: str | Path) -> list[EntitySpan]:
    """Read tag-interchange lines without corpus validation (for tooling
    that already trusts the file; use import_external_tags to validate)."""
    spans = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                spans.append(
                    EntitySpan(
                        record_id=data["record_id"],
                        start=data["start"],
                        end=data["end"],
                        surface=data["text"],
                        label=EntityLabel(data["label"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise TagValidationError(f"{path}:{line_no}: bad tag line: {exc}") from exc
    return spans
