"""Model backends.

A backend takes a batch of texts and returns, per text, predicted spans as
``(start, end, surface, label)`` tuples with character offsets. Two
backends exist: ``flair:<model-id-or-path>`` loads a Flair sequence tagger
(the framework is an optional dependency), and ``pattern:<rules.json>``
runs a deterministic regex tagger, which needs no downloads and keeps the
adapter testable offline.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Protocol, Sequence

Span = tuple[int, int, str, str]


class AdapterError(RuntimeError):
    """Raised for model-loading and prediction failures."""


class SpanModel(Protocol):
    def predict_batch(self, texts: Sequence[str]) -> list[list[Span]]: ...


class PatternModel:
    """Regex-rule tagger: each rule is ``{"label": ..., "pattern": ...}``.

    Rules apply in file order; a match overlapping an earlier rule's match
    is skipped, so each text yields non-overlapping spans.
    """

    def __init__(self, rules: Sequence[tuple[str, re.Pattern]]):
        self.rules = list(rules)

    @classmethod
    def from_file(cls, path: str | Path) -> "PatternModel":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except FileNotFoundError as exc:
            raise AdapterError(f"pattern rules file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise AdapterError(f"{path}: invalid JSON: {exc}") from exc
        rules = []
        for i, rule in enumerate(data.get("rules", [])):
            try:
                rules.append((rule["label"], re.compile(rule["pattern"])))
            except (KeyError, re.error) as exc:
                raise AdapterError(f"{path}: bad rule #{i}: {exc}") from exc
        if not rules:
            raise AdapterError(f"{path}: no rules defined")
        return cls(rules)

    def predict_batch(self, texts: Sequence[str]) -> list[list[Span]]:
        return [self._predict(text) for text in texts]

    def _predict(self, text: str) -> list[Span]:
        taken: list[tuple[int, int]] = []
        spans: list[Span] = []
        for label, pattern in self.rules:
            for match in pattern.finditer(text):
                start, end = match.span()
                if start == end:
                    continue
                if any(start < e and s < end for s, e in taken):
                    continue
                taken.append((start, end))
                spans.append((start, end, match.group(), label))
        spans.sort(key=lambda s: s[0])
        return spans


class FlairModel:
    """Wrapper around a Flair ``SequenceTagger``."""

    def __init__(self, identifier: str):
        try:
            from flair.models import SequenceTagger
        except ImportError as exc:
            raise AdapterError(
                "the flair framework is not installed; "
                "install the 'flair' extra or use a pattern: model"
            ) from exc
        try:
            self._tagger = SequenceTagger.load(identifier)
        except Exception as exc:
            raise AdapterError(f"could not load model {identifier!r}: {exc}") from exc

    def predict_batch(self, texts: Sequence[str]) -> list[list[Span]]:
        from flair.data import Sentence

        sentences = [Sentence(text, use_tokenizer=True) for text in texts]
        self._tagger.predict(sentences)
        results = []
        for sentence in sentences:
            spans = []
            for entity in sentence.get_spans("ner"):
                spans.append(
                    (
                        entity.start_position,
                        entity.end_position,
                        entity.text,
                        entity.get_label("ner").value,
                    )
                )
            results.append(spans)
        return results


def load_model(identifier: str) -> SpanModel:
    """Resolve ``pattern:<rules.json>`` or ``flair:<model>`` identifiers.

    A bare identifier without a scheme is treated as a Flair model name.
    """
    if identifier.startswith("pattern:"):
        return PatternModel.from_file(identifier[len("pattern:"):])
    if identifier.startswith("flair:"):
        return FlairModel(identifier[len("flair:"):])
    return FlairModel(identifier)
