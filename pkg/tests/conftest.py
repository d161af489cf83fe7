from __future__ import annotations

from pathlib import Path

import pytest

from idiom_forge.backends import stub_backends
from idiom_forge.corpus import clean_petci, read_raw_rows, split_corpus

DATA = Path(__file__).parent / "data"
FIXTURE20 = DATA / "petci_fixture20.tsv"

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def backends():
    return stub_backends()


@pytest.fixture
def pairs20():
    return clean_petci(read_raw_rows(FIXTURE20))


@pytest.fixture
def split20(pairs20):
    return split_corpus(pairs20, 12, seed=7, provenance="fixture")


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(criterion: str, ok: bool, detail: str = ""):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}  {detail}".rstrip())
        assert ok, f"{criterion}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
