from __future__ import annotations

import json
from pathlib import Path

import pytest

from cskprobe._ac import available_backends

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def tokenize_cases() -> list[dict]:
    with open(DATA_DIR / "tokenize_fixture.jsonl", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


@pytest.fixture(scope="session")
def syllable_cases() -> list[tuple[str, int]]:
    cases = []
    with open(DATA_DIR / "syllables_fixture.tsv", encoding="utf-8") as f:
        for line in f:
            if line.startswith("#"):
                continue
            word, count = line.split()
            cases.append((word, int(count)))
    return cases


@pytest.fixture(scope="session")
def lemma_cases() -> list[tuple[str, str]]:
    cases = []
    with open(DATA_DIR / "lemma_fixture.tsv", encoding="utf-8") as f:
        for line in f:
            if line.startswith("#"):
                continue
            inflected, lemma = line.split()
            cases.append((inflected, lemma))
    return cases


@pytest.fixture(params=available_backends())
def matcher_backend(request) -> str:
    """Run matcher-sensitive tests once per available scan backend."""
    return request.param
