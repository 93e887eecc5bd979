"""Gazetteer tables: curated entity names, abbreviations, and canonical forms.

A gazetteer is a three-column CSV (``text,abbreviation,disambiguated_form``)
listing known writing variants of entities. The same file drives both the
rule-based tagger (which strings to look for) and disambiguation (what to
rewrite them to).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

EXPECTED_HEADER = ("text", "abbreviation", "disambiguated_form")


class GazetteerError(ValueError):
    """Raised when a gazetteer file violates its format contract."""


@dataclass(frozen=True)
class GazetteerEntry:
    text: str
    abbreviation: str
    disambiguated_form: str


class Gazetteer:
    """In-memory gazetteer with an ambiguity-filtered abbreviation index.

    Entries keep file order (ties between equally good matches go to the
    earlier entry). An abbreviation that maps to more than one distinct
    disambiguated form is excluded from abbreviation matching entirely, so a
    bare ambiguous abbreviation in a text is never rewritten.
    """

    def __init__(self, entries: Iterable[GazetteerEntry]):
        self.entries: list[GazetteerEntry] = list(entries)
        for entry in self.entries:
            if not entry.disambiguated_form:
                raise GazetteerError(
                    f"gazetteer entry for text {entry.text!r} has an empty disambiguated form"
                )
        forms_by_abbrev: dict[str, set[str]] = {}
        for entry in self.entries:
            if entry.abbreviation:
                forms_by_abbrev.setdefault(entry.abbreviation, set()).add(
                    entry.disambiguated_form
                )
        self.ambiguous_abbreviations: frozenset[str] = frozenset(
            abbrev for abbrev, forms in forms_by_abbrev.items() if len(forms) > 1
        )
        # First entry in file order wins for each unambiguous abbreviation.
        self._abbrev_index: list[tuple[str, GazetteerEntry]] = []
        seen: set[str] = set()
        for entry in self.entries:
            abbrev = entry.abbreviation
            if not abbrev or abbrev in self.ambiguous_abbreviations or abbrev in seen:
                continue
            seen.add(abbrev)
            self._abbrev_index.append((abbrev, entry))
        self.disambiguated_forms: frozenset[str] = frozenset(
            entry.disambiguated_form for entry in self.entries
        )

    def __len__(self) -> int:
        return len(self.entries)

    def __bool__(self) -> bool:
        return bool(self.entries)

    @property
    def abbreviation_index(self) -> list[tuple[str, GazetteerEntry]]:
        return list(self._abbrev_index)

    def matchable_forms(self) -> set[str]:
        """Every string the tagger should recognize as a surface occurrence:
        entry texts, unambiguous abbreviations, and disambiguated forms."""
        forms = {entry.text for entry in self.entries if entry.text}
        forms.update(abbrev for abbrev, _ in self._abbrev_index)
        forms.update(self.disambiguated_forms)
        return forms

    @classmethod
    def empty(cls) -> "Gazetteer":
        return cls([])


def load_gazetteer(path: str | Path) -> Gazetteer:
    """Load a gazetteer CSV with header ``text,abbreviation,disambiguated_form``."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_gazetteer(handle, source=str(path))


def parse_gazetteer(handle: io.TextIOBase, source: str = "<stream>") -> Gazetteer:
    reader = csv.reader(handle)
    try:
        header = next(reader)
    except StopIteration:
        raise GazetteerError(f"{source}: empty gazetteer file (missing header)") from None
    if tuple(h.strip() for h in header) != EXPECTED_HEADER:
        raise GazetteerError(
            f"{source}: expected header {','.join(EXPECTED_HEADER)!r}, got {','.join(header)!r}"
        )
    entries = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise GazetteerError(f"{source}:{line_no}: expected 3 columns, got {len(row)}")
        text, abbreviation, form = (cell.strip() for cell in row)
        if not form:
            raise GazetteerError(f"{source}:{line_no}: empty disambiguated_form")
        entries.append(GazetteerEntry(text, abbreviation, form))
    return Gazetteer(entries)
