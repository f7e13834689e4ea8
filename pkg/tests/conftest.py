import sys
from contextlib import contextmanager
from pathlib import Path

import pytest

from cement.history import ChangeHistory, CommitRef, EntityId, EntityKind, HistoryMeta

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


def M(name, path="src/main/java/App.java"):
    return EntityId(EntityKind.METHOD, path, name)


def T(name, path="src/test/java/AppTest.java"):
    return EntityId(EntityKind.TEST, path, name)


def make_history(num_commits, revisions, digest="test"):
    commits = tuple(CommitRef(f"c{i:04d}", i) for i in range(num_commits))
    revs = {eid: tuple(sorted(set(r))) for eid, r in revisions.items() if r}
    return ChangeHistory(commits, revs, HistoryMeta(repo="fixture", config_digest=digest))


@pytest.fixture
def mt_history():
    """Five commits: method M changed at 0 and 3, test T at 1, 3 and 4."""
    return make_history(5, {M("M"): [0, 3], T("T"): [1, 3, 4]})


@pytest.fixture
def fixtures_dir():
    return FIXTURES


ACCEPTANCE_LINES: list[str] = []


@contextmanager
def criterion(number: int, claim: str):
    """Record one PASS/FAIL line for an acceptance criterion; failures still raise."""
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        line = f"criterion {number}: {status}  {claim}"
        ACCEPTANCE_LINES.append(line)
        print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
