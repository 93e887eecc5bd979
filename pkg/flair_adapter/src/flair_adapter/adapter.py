"""Run a span model over a corpus file and emit tag-interchange lines.

The adapter reads the corpus JSON-lines format (``record_id`` plus
``ack_text``; records without text are skipped), batches the texts through
the model, and writes one interchange line per predicted span:
``{"record_id", "start", "end", "text", "label"}``. Model labels outside
the six-category scheme are dropped and tallied; the adapter does no other
post-processing. Offsets are validated against the text before anything is
written, and a misaligned span aborts the run with nothing on disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .models import AdapterError, SpanModel, load_model

ENTITY_LABELS = ("FUND", "GRNB", "IND", "COR", "UNI", "MISC")


@dataclass
class AdapterConfig:
    model: str
    corpus: str
    out: str
    batch_size: int = 32

    def validate(self) -> None:
        if self.batch_size < 1:
            raise AdapterError(f"batch size must be >= 1, got {self.batch_size}")
        if not Path(self.corpus).is_file():
            raise AdapterError(f"corpus file not found: {self.corpus}")


@dataclass
class RunSummary:
    records_tagged: int = 0
    lines_written: int = 0
    per_label: dict[str, int] = field(default_factory=dict)
    dropped_labels: dict[str, int] = field(default_factory=dict)

    def format(self) -> str:
        parts = [
            f"records tagged: {self.records_tagged}",
            f"lines written: {self.lines_written}",
        ]
        for label in ENTITY_LABELS:
            parts.append(f"{label}: {self.per_label.get(label, 0)}")
        if self.dropped_labels:
            dropped = ", ".join(
                f"{label}={count}" for label, count in sorted(self.dropped_labels.items())
            )
            parts.append(f"dropped labels: {dropped}")
        return "\n".join(parts)


def read_corpus_texts(path: str | Path) -> list[tuple[str, str]]:
    """(record_id, ack_text) pairs for records that carry a text."""
    pairs = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                record_id = data["record_id"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise AdapterError(f"{path}:{line_no}: bad corpus line: {exc}") from exc
            text = data.get("ack_text")
            if isinstance(text, str) and text:
                pairs.append((record_id, text))
    return pairs


def run_adapter(config: AdapterConfig, model: SpanModel | None = None) -> RunSummary:
    """Predict spans for every ack-bearing record and write the output file.

    The whole prediction is validated before the file is created, so a
    failing run leaves no partial output behind.
    """
    config.validate()
    if model is None:
        model = load_model(config.model)
    pairs = read_corpus_texts(config.corpus)
    summary = RunSummary()
    lines: list[str] = []
    for offset in range(0, len(pairs), config.batch_size):
        batch = pairs[offset : offset + config.batch_size]
        predictions = model.predict_batch([text for _, text in batch])
        if len(predictions) != len(batch):
            raise AdapterError(
                f"model returned {len(predictions)} predictions for a batch of {len(batch)}"
            )
        for (record_id, text), spans in zip(batch, predictions):
            summary.records_tagged += 1
            for start, end, surface, label in spans:
                if label not in ENTITY_LABELS:
                    summary.dropped_labels[label] = summary.dropped_labels.get(label, 0) + 1
                    continue
                _check_alignment(record_id, text, start, end, surface)
                lines.append(
                    json.dumps(
                        {
                            "record_id": record_id,
                            "start": start,
                            "end": end,
                            "text": surface,
                            "label": label,
                        },
                        ensure_ascii=False,
                    )
                )
                summary.per_label[label] = summary.per_label.get(label, 0) + 1
                summary.lines_written += 1
    with open(config.out, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")
    return summary


def _check_alignment(
    record_id: str, text: str, start: int, end: int, surface: str
) -> None:
    if not (isinstance(start, int) and isinstance(end, int) and 0 <= start < end <= len(text)):
        raise AdapterError(
            f"record {record_id!r}: span offsets [{start}:{end}] out of range "
            f"(text length {len(text)})"
        )
    slice_text = text[start:end]
    if surface != slice_text:
        raise AdapterError(
            f"record {record_id!r}: span text {surface!r} does not match "
            f"slice [{start}:{end}] = {slice_text!r}"
        )
