"""Unified diff parsing and changed-line to entity mapping."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from cement.extraction.javalike import EntityLocator

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass(frozen=True)
class DiffHunk:
    """A run of changed lines. Ranges are ``(start, length)``, 1-based."""

    file_path: str
    old_range: tuple[int, int]
    new_range: tuple[int, int]

    @property
    def deleted_lines(self) -> range:
        start, length = self.old_range
        return range(start, start + length)

    @property
    def added_lines(self) -> range:
        start, length = self.new_range
        return range(start, start + length)


@dataclass
class FileDiff:
    old_path: str | None  # None for added files
    new_path: str | None  # None for deleted files
    hunks: list[DiffHunk]
    binary: bool = False

    @property
    def path(self) -> str:
        return self.new_path or self.old_path or ""


def _unquote(path: str) -> str:
    path = path.strip()
    if not (path.startswith('"') and path.endswith('"')):
        return path
    body = path[1:-1]
    raw = bytearray()
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            if nxt in "01234567" and re.match(r"[0-7]{3}", body[i + 1 : i + 4]):
                raw.append(int(body[i + 1 : i + 4], 8))
                i += 4
                continue
            raw.extend(_ESCAPES.get(nxt, nxt).encode("utf-8"))
            i += 2
            continue
        raw.extend(ch.encode("utf-8"))
        i += 1
    return raw.decode("utf-8", errors="replace")


def _side_path(header_value: str) -> str | None:
    value = _unquote(header_value.split("\t", 1)[0])
    if value == "/dev/null":
        return None
    if value[:2] in ("a/", "b/"):
        return value[2:]
    return value


def parse_unified_diff(text: str) -> list[FileDiff]:
    """Parse a (possibly multi-file) unified diff.

    Each hunk body is split into maximal runs of ``-``/``+`` lines, so the
    returned :class:`DiffHunk` ranges cover changed lines only, regardless of
    how much context the producer emitted.
    """
    files: list[FileDiff] = []
    cur: FileDiff | None = None
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("diff --git "):
            cur = FileDiff(None, None, [])
            files.append(cur)
            i += 1
            continue
        if line.startswith("--- ") and i + 1 < len(lines) and lines[i + 1].startswith("+++ "):
            if cur is None or cur.hunks:
                cur = FileDiff(None, None, [])
                files.append(cur)
            cur.old_path = _side_path(line[4:])
            cur.new_path = _side_path(lines[i + 1][4:])
            i += 2
            continue
        if line.startswith("Binary files ") and cur is not None:
            cur.binary = True
            i += 1
            continue
        m = _HUNK_RE.match(line)
        if m and cur is not None:
            old_line = int(m.group(1))
            new_line = int(m.group(3))
            old_left = int(m.group(2)) if m.group(2) is not None else 1
            new_left = int(m.group(4)) if m.group(4) is not None else 1
            # With zero length the header names the line *before* the change.
            if old_left == 0:
                old_line += 1
            if new_left == 0:
                new_line += 1
            i += 1
            run_old = run_new = None
            del_n = add_n = 0

            def flush() -> None:
                nonlocal run_old, run_new, del_n, add_n
                if del_n or add_n:
                    cur.hunks.append(
                        DiffHunk(cur.path, (run_old, del_n), (run_new, add_n))
                    )
                run_old = run_new = None
                del_n = add_n = 0

            while i < len(lines) and (old_left > 0 or new_left > 0 or lines[i].startswith("\\")):
                body = lines[i]
                tag = body[:1]
                if tag == "\\":
                    i += 1
                    continue
                if tag in ("-", "+"):
                    if run_old is None:
                        run_old, run_new = old_line, new_line
                    if tag == "-":
                        del_n += 1
                        old_line += 1
                        old_left -= 1
                    else:
                        add_n += 1
                        new_line += 1
                        new_left -= 1
                else:
                    flush()
                    old_line += 1
                    new_line += 1
                    old_left -= 1
                    new_left -= 1
                i += 1
            flush()
            continue
        i += 1
    return files


def _overlaps(lines: range, loc: EntityLocator) -> bool:
    return len(lines) > 0 and lines.start <= loc.end_line and loc.start_line <= lines.stop - 1


def map_diff_to_entities(
    old_locators: Iterable[EntityLocator],
    new_locators: Iterable[EntityLocator],
    hunks: Iterable[DiffHunk],
) -> set[str]:
    """Qualified names of entities touched by any deleted (old) or added (new) line."""
    old_locators = list(old_locators)
    new_locators = list(new_locators)
    changed: set[str] = set()
    for h in hunks:
        deleted, added = h.deleted_lines, h.added_lines
        changed.update(loc.qualified_name for loc in old_locators if _overlaps(deleted, loc))
        changed.update(loc.qualified_name for loc in new_locators if _overlaps(added, loc))
    return changed
