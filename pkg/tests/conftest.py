from __future__ import annotations

from pathlib import Path

import pytest

from ackmine.corpus import read_corpus_jsonl
from ackmine.gazetteer import load_gazetteer
from ackmine.tagging import read_spans_jsonl

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fund_gazetteer():
    return load_gazetteer(DATA_DIR / "fund_gazetteer.csv")


@pytest.fixture(scope="session")
def uni_gazetteer():
    return load_gazetteer(DATA_DIR / "uni_gazetteer.csv")


@pytest.fixture(scope="session")
def cor_gazetteer():
    return load_gazetteer(DATA_DIR / "cor_gazetteer.csv")


@pytest.fixture(scope="session")
def disambig_corpus():
    return read_corpus_jsonl(DATA_DIR / "disambig_corpus.jsonl")


@pytest.fixture(scope="session")
def disambig_spans():
    return read_spans_jsonl(DATA_DIR / "disambig_spans.jsonl")
