"""Deterministic sentence segmentation and word counting.

Rule-based on purpose: no model dependency, reproducible to the character.
A sentence break is a ``.``, ``?``, or ``!`` followed by whitespace and an
uppercase letter, unless the preceding token is a guarded abbreviation or a
single-letter initial ("J."). Words are whitespace tokens that survive
stripping surrounding punctuation.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

DEFAULT_ABBREVIATIONS = frozenset(
    {
        "Dr.",
        "Drs.",
        "Mr.",
        "Mrs.",
        "Ms.",
        "Prof.",
        "No.",
        "Nos.",
        "no.",
        "nos.",
        "e.g.",
        "i.e.",
        "al.",
        "vs.",
        "St.",
        "Fig.",
    }
)

_INITIAL_RE = re.compile(r"^[A-Z]\.$")
_SENTENCE_END = frozenset(".?!")
# Opening punctuation stripped before comparing a token against the guard list.
_LEADING_STRIP = "([{'\"‘“"
_TOKEN_PUNCT = string.punctuation + "…‘’“”–—"


@dataclass(frozen=True)
class TextLength:
    sentence_count: int
    word_count: int


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Read a guard list: one abbreviation per line, blank lines ignored."""
    with open(path, "r", encoding="utf-8") as handle:
        return frozenset(line.strip() for line in handle if line.strip())


def split_sentences(
    text: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Split ``text`` into sentences.

    Joining the output with spaces reproduces the input modulo whitespace,
    and no returned sentence is empty. Raises ``ValueError`` for empty or
    whitespace-only input.
    """
    if not text or not text.strip():
        raise ValueError("cannot split empty text into sentences")
    guard = set(abbreviations)
    breaks: list[int] = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _SENTENCE_END:
            continue
        j = i + 1
        if j >= n or not text[j].isspace():
            continue
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k >= n or not text[k].isupper():
            continue
        if ch == "." and _is_guarded(text, i, guard):
            continue
        breaks.append(j)
    sentences = []
    start = 0
    for brk in breaks:
        piece = text[start:brk].strip()
        if piece:
            sentences.append(piece)
        start = brk
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_guarded(text: str, dot_index: int, guard: set[str]) -> bool:
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : dot_index + 1].lstrip(_LEADING_STRIP)
    return token in guard or bool(_INITIAL_RE.match(token))


def count_words(text: str) -> int:
    """Number of whitespace tokens that are not punctuation-only.

    Each token is stripped of leading/trailing punctuation before counting,
    so "(NSF)" counts once and a lone "," not at all. Empty text counts 0.
    """
    count = 0
    for token in text.split():
        if token.strip(_TOKEN_PUNCT):
            count += 1
    return count


def text_length(
    text: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS
) -> TextLength:
    return TextLength(
        sentence_count=len(split_sentences(text, abbreviations)),
        word_count=count_words(text),
    )
