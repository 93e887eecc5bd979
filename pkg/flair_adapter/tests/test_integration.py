"""Round-trip against the primary toolkit through its public interfaces:
the adapter's output file must pass the `ackmine tag --mode import`
validation with zero rejected lines."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

pytestmark = pytest.mark.skipif(
    shutil.which("ackmine") is None, reason="primary toolkit CLI not installed"
)


def _run_adapter_cli(out_path: Path) -> subprocess.CompletedProcess:
    return subprocess.run(
        [
            sys.executable,
            "-m",
            "flair_adapter.cli",
            "--model", f"pattern:{DATA / 'pattern_rules.json'}",
            "--corpus", str(DATA / "adapter_corpus.jsonl"),
            "--out", str(out_path),
            "--batch-size", "2",
        ],
        capture_output=True,
        text=True,
    )


def test_adapter_output_passes_import_with_zero_rejects(tmp_path):
    adapter_out = tmp_path / "adapter_tags.jsonl"
    result = _run_adapter_cli(adapter_out)
    assert result.returncode == 0, result.stderr
    assert "lines written: 7" in result.stdout

    imported = tmp_path / "imported.jsonl"
    import_run = subprocess.run(
        [
            "ackmine",
            "tag",
            "--corpus", str(DATA / "adapter_corpus.jsonl"),
            "--mode", "import",
            "--tags", str(adapter_out),
            "--out", str(imported),
        ],
        capture_output=True,
        text=True,
    )
    assert import_run.returncode == 0, import_run.stderr
    assert "rejected" not in import_run.stderr.lower()

    ours = [json.loads(line) for line in adapter_out.read_text().splitlines()]
    theirs = [json.loads(line) for line in imported.read_text().splitlines()]
    assert sorted(theirs, key=lambda d: (d["record_id"], d["start"])) == sorted(
        ours, key=lambda d: (d["record_id"], d["start"])
    )


def test_offsets_match_corpus_slices_exactly(tmp_path):
    adapter_out = tmp_path / "adapter_tags.jsonl"
    assert _run_adapter_cli(adapter_out).returncode == 0
    texts = {}
    for line in (DATA / "adapter_corpus.jsonl").read_text().splitlines():
        record = json.loads(line)
        texts[record["record_id"]] = record.get("ack_text")
    for line in adapter_out.read_text().splitlines():
        span = json.loads(line)
        assert texts[span["record_id"]][span["start"] : span["end"]] == span["text"]


def test_model_load_failure_is_nonzero_exit(tmp_path):
    result = subprocess.run(
        [
            sys.executable,
            "-m",
            "flair_adapter.cli",
            "--model", f"pattern:{tmp_path / 'absent.json'}",
            "--corpus", str(DATA / "adapter_corpus.jsonl"),
            "--out", str(tmp_path / "out.jsonl"),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 1
    assert "error:" in result.stderr
