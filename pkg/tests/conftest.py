import datetime as dt

import pytest

from dupescan.corpus import Corpus, ManuscriptRecord

ACCEPTANCE_LINES: list[str] = []


def rec(id, journal="J1", sub="2020-01-01", dec=None, decision=None, title="", abstract="",
        transferred_from=None):
    """Terse record factory; decision defaults to pending/rejected from ``dec``."""
    if decision is None:
        decision = "pending" if dec is None else "rejected"
    return ManuscriptRecord(
        id=id, journal_id=journal, title=title or f"title of {id}", abstract=abstract,
        submitted_at=dt.date.fromisoformat(sub),
        decided_at=dt.date.fromisoformat(dec) if dec else None,
        decision=decision, transferred_from=transferred_from,
    )


def corpus_of(*records):
    return Corpus.from_records(records)


@pytest.fixture
def make_rec():
    return rec


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
