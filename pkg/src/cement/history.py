"""Entities, linearized commits and per-entity change timelines.

A :class:`ChangeHistory` is the single input to every coupling computation.
It maps each observed entity to the strictly increasing list of commit
indices (over a first-parent linearization) at which the entity changed.
"""

from __future__ import annotations

import enum
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

from cement.errors import InputError

logger = logging.getLogger(__name__)

STORE_VERSION = 1


class EntityKind(str, enum.Enum):
    METHOD = "method"
    TEST = "test"

    @classmethod
    def parse(cls, value: str) -> EntityKind:
        try:
            return cls(value.lower())
        except ValueError:
            raise InputError(f"unknown entity kind {value!r}") from None


@dataclass(frozen=True, order=True)
class EntityId:
    """Identity of a method or test: kind plus path-scoped qualified name."""

    kind: EntityKind
    file_path: str
    qualified_name: str

    @property
    def display(self) -> str:
        return f"{self.file_path}::{self.qualified_name}"

    @property
    def key(self) -> tuple[str, str]:
        return (self.file_path, self.qualified_name)

    def __str__(self) -> str:
        return self.display


@dataclass(frozen=True)
class CommitRef:
    hash: str
    index: int


class _NoHistory:
    """Marker returned for entities that never changed in a history."""

    _instance: _NoHistory | None = None

    def __new__(cls) -> _NoHistory:
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoHistory"

    def __bool__(self) -> bool:
        return False


NO_HISTORY = _NoHistory()


@dataclass(frozen=True)
class HistoryMeta:
    repo: str = ""
    config_digest: str = ""
    # Not persisted: the store must be byte-identical across re-extractions.
    created: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ChangeHistory:
    commits: tuple[CommitRef, ...]
    revisions: Mapping[EntityId, tuple[int, ...]]
    meta: HistoryMeta = HistoryMeta()

    def __post_init__(self) -> None:
        _validate(self.commits, self.revisions)

    # Lookup helpers

    @property
    def num_commits(self) -> int:
        return len(self.commits)

    def entities(self, kind: EntityKind | None = None) -> list[EntityId]:
        """Stored entities in canonical (sorted) order, optionally of one kind."""
        ids = sorted(self.revisions)
        if kind is None:
            return ids
        return [e for e in ids if e.kind is kind]

    @property
    def methods(self) -> list[EntityId]:
        return self.entities(EntityKind.METHOD)

    @property
    def tests(self) -> list[EntityId]:
        return self.entities(EntityKind.TEST)

    def find(self, file_path: str, qualified_name: str) -> EntityId | None:
        for kind in EntityKind:
            eid = EntityId(kind, file_path, qualified_name)
            if eid in self.revisions:
                return eid
        return None

    def commit_index(self, hash_or_prefix: str) -> int:
        matches = [c.index for c in self.commits if c.hash.startswith(hash_or_prefix)]
        if len(matches) != 1:
            raise InputError(
                f"commit {hash_or_prefix!r} matches {len(matches)} commits in history"
            )
        return matches[0]

    def truncated(self, cutoff_index: int) -> ChangeHistory:
        """History restricted to commits ``0..cutoff_index`` (inclusive).

        Entities whose every revision lies after the cutoff disappear.
        """
        if not 0 <= cutoff_index < self.num_commits:
            raise InputError(f"cutoff {cutoff_index} outside 0..{self.num_commits - 1}")
        revisions = {}
        for eid, revs in self.revisions.items():
            kept = tuple(r for r in revs if r <= cutoff_index)
            if kept:
                revisions[eid] = kept
        return ChangeHistory(self.commits[: cutoff_index + 1], revisions, self.meta)

    def digest(self) -> str:
        return hashlib.sha256(dumps(self).encode("utf-8")).hexdigest()


def _validate(commits: Sequence[CommitRef], revisions: Mapping[EntityId, Sequence[int]]) -> None:
    seen_hashes = set()
    for i, c in enumerate(commits):
        if c.index != i:
            raise InputError(f"commit {c.hash} has index {c.index}, expected {i}")
        if c.hash in seen_hashes:
            raise InputError(f"duplicate commit hash {c.hash}")
        seen_hashes.add(c.hash)
    keys: dict[tuple[str, str], EntityKind] = {}
    n = len(commits)
    for eid, revs in revisions.items():
        if not revs:
            raise InputError(f"{eid} has an empty revision list")
        if any(b <= a for a, b in zip(revs, revs[1:])):
            raise InputError(f"{eid} revisions are not strictly increasing")
        if revs[0] < 0 or revs[-1] >= n:
            raise InputError(f"{eid} revision index out of range 0..{n - 1}")
        if eid.key in keys:
            raise InputError(f"{eid} stored under two kinds")
        keys[eid.key] = eid.kind


def revisions_of(history: ChangeHistory, eid: EntityId) -> tuple[int, ...] | _NoHistory:
    return history.revisions.get(eid, NO_HISTORY)


def linearize_commits(
    raw_commits: Iterable[tuple[str, Sequence[str], int]], head: str
) -> list[CommitRef]:
    """Follow first parents from ``head`` back to the root; return oldest first.

    ``raw_commits`` holds ``(hash, parent_hashes, author_timestamp)`` triples.
    Commits reachable only through second (merge) parents are dropped.
    """
    parents = {}
    for h, ps, _ts in raw_commits:
        parents[h] = tuple(ps)
    if head not in parents:
        raise InputError(f"head {head!r} not among the supplied commits")
    chain = []
    seen = set()
    cur: str | None = head
    while cur is not None:
        if cur in seen:
            raise InputError(f"parent cycle detected at {cur}")
        if cur not in parents:
            raise InputError(f"parent {cur!r} missing from the supplied commits")
        seen.add(cur)
        chain.append(cur)
        ps = parents[cur]
        cur = ps[0] if ps else None
    chain.reverse()
    return [CommitRef(h, i) for i, h in enumerate(chain)]


def build_history(
    commits: Sequence[CommitRef],
    changes: Iterable[tuple[int, EntityId]],
    meta: HistoryMeta = HistoryMeta(),
) -> ChangeHistory:
    """Assemble a history from ``(commit_index, entity)`` change events.

    Duplicate events within one commit collapse to a single revision. If the
    same path-scoped entity shows up under two kinds, the first one seen wins.
    """
    kinds: dict[tuple[str, str], EntityKind] = {}
    revs: dict[EntityId, set[int]] = {}
    for index, eid in sorted(changes, key=lambda ch: ch[0]):
        known = kinds.setdefault(eid.key, eid.kind)
        if known is not eid.kind:
            logger.warning("kind conflict for %s: keeping %s", eid.display, known.value)
            eid = EntityId(known, eid.file_path, eid.qualified_name)
        revs.setdefault(eid, set()).add(index)
    return ChangeHistory(
        tuple(commits),
        {eid: tuple(sorted(r)) for eid, r in sorted(revs.items())},
        meta,
    )


def merge_histories(base: ChangeHistory, delta: ChangeHistory) -> ChangeHistory:
    """Extend ``base`` with the revisions recorded in ``delta``.

    ``delta.commits`` must start with ``base.commits``; an empty delta leaves
    ``base`` unchanged.
    """
    if not delta.commits:
        return base
    if delta.meta.config_digest != base.meta.config_digest:
        raise InputError("cannot merge histories extracted with different configs")
    if delta.commits[: base.num_commits] != base.commits:
        raise InputError("base commit sequence is not a prefix of the delta")
    commits = delta.commits
    changes = [(r, eid) for eid, rs in base.revisions.items() for r in rs]
    changes += [(r, eid) for eid, rs in delta.revisions.items() for r in rs]
    return build_history(commits, changes, base.meta)


# Store serialization

_HEADER_FIELDS = ["version", "repo", "num_commits", "config_digest"]
_COMMIT_FIELDS = ["index", "hash"]
_ENTITY_FIELDS = ["kind", "file_path", "qualified_name", "revisions"]


def _line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def write_history(history: ChangeHistory, fp: IO[str]) -> None:
    fp.write(
        _line(
            {
                "version": STORE_VERSION,
                "repo": history.meta.repo,
                "num_commits": history.num_commits,
                "config_digest": history.meta.config_digest,
            }
        )
    )
    for c in history.commits:
        fp.write(_line({"index": c.index, "hash": c.hash}))
    for eid in history.entities():
        fp.write(
            _line(
                {
                    "kind": eid.kind.value,
                    "file_path": eid.file_path,
                    "qualified_name": eid.qualified_name,
                    "revisions": list(history.revisions[eid]),
                }
            )
        )


def dumps(history: ChangeHistory) -> str:
    buf = io.StringIO()
    write_history(history, buf)
    return buf.getvalue()


def _records(fp: IO[str]) -> Iterator[tuple[int, dict]]:
    for lineno, line in enumerate(fp, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"line {lineno}: invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise InputError(f"line {lineno}: expected an object")
        yield lineno, obj


def _check_fields(lineno: int, obj: dict, fields: list[str]) -> None:
    if list(obj) != fields:
        raise InputError(f"line {lineno}: expected fields {fields}, got {list(obj)}")


def read_history(fp: IO[str]) -> ChangeHistory:
    records = _records(fp)
    try:
        lineno, header = next(records)
    except StopIteration:
        raise InputError("empty history store") from None
    _check_fields(lineno, header, _HEADER_FIELDS)
    if header["version"] != STORE_VERSION:
        raise InputError(f"unsupported store version {header['version']}")
    num_commits = header["num_commits"]
    commits = []
    revisions: dict[EntityId, tuple[int, ...]] = {}
    for lineno, obj in records:
        if len(commits) < num_commits:
            _check_fields(lineno, obj, _COMMIT_FIELDS)
            commits.append(CommitRef(str(obj["hash"]), int(obj["index"])))
            continue
        _check_fields(lineno, obj, _ENTITY_FIELDS)
        revs = obj["revisions"]
        if not isinstance(revs, list) or not all(isinstance(r, int) for r in revs):
            raise InputError(f"line {lineno}: revisions must be an integer array")
        eid = EntityId(EntityKind.parse(obj["kind"]), obj["file_path"], obj["qualified_name"])
        if eid in revisions:
            raise InputError(f"line {lineno}: duplicate entity {eid}")
        revisions[eid] = tuple(revs)
    if len(commits) != num_commits:
        raise InputError(f"header promises {num_commits} commits, found {len(commits)}")
    meta = HistoryMeta(repo=header["repo"], config_digest=header["config_digest"])
    return ChangeHistory(tuple(commits), revisions, meta)


def loads(text: str) -> ChangeHistory:
    return read_history(io.StringIO(text))


def save(history: ChangeHistory, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        write_history(history, fp)


def load(path: str | Path) -> ChangeHistory:
    with open(path, encoding="utf-8") as fp:
        return read_history(fp)
