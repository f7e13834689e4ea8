"""Build a :class:`ChangeHistory` from a git repository or a pre-extracted change log."""

from __future__ import annotations

import json
import logging
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from cement.errors import FatalError, InputError
from cement.extraction.classify import (
    Classification,
    ClassifierConfig,
    classify_path_name,
    matches_any,
)
from cement.extraction.diff import FileDiff, map_diff_to_entities, parse_unified_diff
from cement.extraction.javalike import extract_entities
from cement.history import (
    ChangeHistory,
    CommitRef,
    EntityId,
    EntityKind,
    HistoryMeta,
    build_history,
    linearize_commits,
    merge_histories,
)

logger = logging.getLogger(__name__)

EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"
DEFAULT_EXTENSIONS = (".java",)
TEST_GRANULARITY = "test-method"


@dataclass
class IngestStats:
    commits: int = 0
    files_parsed: int = 0
    files_skipped: int = 0
    extraction_warnings: int = 0
    warnings: list[str] = field(default_factory=list)

    def add(self, other: IngestStats) -> None:
        self.commits += other.commits
        self.files_parsed += other.files_parsed
        self.files_skipped += other.files_skipped
        self.extraction_warnings += other.extraction_warnings
        self.warnings.extend(other.warnings)


class Git:
    """Thin wrapper over the git command line."""

    def __init__(self, repo: str | Path):
        self.repo = Path(repo)
        if not self.repo.is_dir():
            raise FatalError(f"repository path {self.repo} does not exist")
        try:
            self.run("rev-parse", "--git-dir")
        except FatalError as e:
            raise FatalError(f"{self.repo} is not a git repository: {e}") from None

    def run(self, *args: str, check: bool = True) -> str:
        cmd = ["git", "-c", "core.quotepath=off", "-C", str(self.repo), *args]
        proc = subprocess.run(cmd, capture_output=True)
        if check and proc.returncode != 0:
            raise FatalError(proc.stderr.decode("utf-8", "replace").strip() or f"{cmd} failed")
        return proc.stdout.decode("utf-8", "replace")

    def resolve(self, rev: str) -> str:
        try:
            return self.run("rev-parse", "--verify", "--quiet", f"{rev}^{{commit}}").strip()
        except FatalError:
            raise InputError(f"cannot resolve {rev!r} to a commit") from None

    def raw_commits(self, head: str) -> list[tuple[str, list[str], int]]:
        out = self.run("log", "--format=%H%x00%P%x00%at", head)
        commits = []
        for line in out.splitlines():
            h, parents, ts = line.split("\x00")
            commits.append((h, parents.split(), int(ts or 0)))
        return commits

    def diff(self, parent: str, commit: str, extensions: Sequence[str]) -> str:
        pathspecs = [f"*{ext}" for ext in extensions]
        return self.run(
            "diff", "--no-renames", "--no-ext-diff", "--no-color", "-U0",
            parent, commit, "--", *pathspecs,
        )

    def show(self, commit: str, path: str) -> str:
        return self.run("show", f"{commit}:{path}")


def first_parent_chain(git: Git, head: str) -> list[CommitRef]:
    head_hash = git.resolve(head)
    return linearize_commits(git.raw_commits(head_hash), head_hash)


def _commit_changes(
    git: Git,
    parent: str,
    commit: CommitRef,
    config: ClassifierConfig,
    extensions: Sequence[str],
) -> tuple[list[tuple[int, EntityId]], IngestStats]:
    stats = IngestStats(commits=1)
    changes = []
    for fd in parse_unified_diff(git.diff(parent, commit.hash, extensions)):
        path = fd.path
        if not path.endswith(tuple(extensions)) or matches_any(path, config.ignore_globs):
            continue
        if fd.binary:
            stats.files_skipped += 1
            continue
        for name in _changed_in_file(git, parent, commit.hash, fd, stats):
            kind = classify_path_name(path, name, config)
            if kind is Classification.IGNORED:
                continue
            ekind = EntityKind.TEST if kind is Classification.TEST else EntityKind.METHOD
            changes.append((commit.index, EntityId(ekind, path, name)))
    return changes, stats


def _changed_in_file(git: Git, parent: str, commit: str, fd: FileDiff, stats: IngestStats) -> set[str]:
    old_locs, new_locs = [], []
    try:
        if fd.old_path is not None:
            res = extract_entities(git.show(parent, fd.old_path), fd.old_path)
            old_locs = res.locators
            stats.extraction_warnings += len(res.warnings)
        if fd.new_path is not None:
            res = extract_entities(git.show(commit, fd.new_path), fd.new_path)
            new_locs = res.locators
            stats.extraction_warnings += len(res.warnings)
    except (FatalError, ValueError) as e:
        stats.files_skipped += 1
        stats.warnings.append(f"{commit[:12]} {fd.path}: {e}")
        return set()
    stats.files_parsed += 1
    return map_diff_to_entities(old_locs, new_locs, fd.hunks)


def ingest_repository(
    repo: str | Path,
    head: str = "HEAD",
    config: ClassifierConfig = ClassifierConfig(),
    *,
    extensions: Sequence[str] = DEFAULT_EXTENSIONS,
    base: ChangeHistory | None = None,
    repo_id: str | None = None,
    jobs: int = 1,
    stats: IngestStats | None = None,
) -> ChangeHistory:
    """Extract method/test change timelines along the first-parent chain of ``head``.

    With ``base`` (a history previously extracted from the same repository and
    config) only the commits after ``base`` are processed and merged in; the
    result equals a fresh extraction.
    """
    git = Git(repo)
    chain = first_parent_chain(git, head)
    meta = HistoryMeta(
        repo=repo_id if repo_id is not None else Path(repo).resolve().name,
        config_digest=config.digest(extensions=list(extensions), granularity=TEST_GRANULARITY),
    )
    start = 0
    if base is not None:
        if base.meta.config_digest != meta.config_digest:
            raise InputError("existing store was extracted with a different configuration")
        if tuple(chain[: base.num_commits]) != base.commits:
            raise InputError("existing store is not a prefix of the current first-parent chain")
        start = base.num_commits

    def work(i: int):
        parent = chain[i - 1].hash if i > 0 else EMPTY_TREE
        return _commit_changes(git, parent, chain[i], config, extensions)

    indices = range(start, len(chain))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, indices))
    else:
        results = [work(i) for i in indices]

    changes = []
    total = IngestStats()
    for ch, st in results:
        changes.extend(ch)
        total.add(st)
    for w in total.warnings:
        logger.warning(w)
    if stats is not None:
        stats.add(total)

    delta = build_history(chain, changes, meta)
    if base is None:
        return delta
    return merge_histories(ChangeHistory(base.commits, base.revisions, meta), delta)


# Pre-extracted change logs

_CHANGELOG_FIELDS = {"commit_hash", "kind", "file_path", "qualified_name"}


def ingest_changelog(
    records: Iterable[dict],
    repo_id: str = "",
    config_digest: str = "changelog",
) -> ChangeHistory:
    """Build a history from oldest-first ``{commit_hash, kind, file_path, qualified_name}`` records.

    Commit indices follow first appearance. A record carrying only
    ``commit_hash`` registers a commit without entity changes.
    """
    order: dict[str, int] = {}
    changes = []
    for n, rec in enumerate(records, 1):
        keys = set(rec)
        if keys - _CHANGELOG_FIELDS or "commit_hash" not in keys:
            raise InputError(f"record {n}: unexpected fields {sorted(keys)}")
        h = str(rec["commit_hash"])
        idx = order.setdefault(h, len(order))
        if keys == {"commit_hash"}:
            continue
        if keys != _CHANGELOG_FIELDS:
            raise InputError(f"record {n}: missing fields {sorted(_CHANGELOG_FIELDS - keys)}")
        changes.append(
            (idx, EntityId(EntityKind.parse(rec["kind"]), rec["file_path"], rec["qualified_name"]))
        )
    commits = [CommitRef(h, i) for h, i in order.items()]
    return build_history(commits, changes, HistoryMeta(repo=repo_id, config_digest=config_digest))


def read_changelog(fp: IO[str]) -> list[dict]:
    records = []
    for lineno, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise InputError(f"change log line {lineno}: {e.msg}") from None
    return records
